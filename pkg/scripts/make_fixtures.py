"""Regenerate the CSV fixtures under tests/data from scikit-learn's bundled
copies of the UCI datasets. Run from the repo root:

    python scripts/make_fixtures.py

The outputs are committed; scikit-learn is only needed to regenerate them.
"""

import os

from sklearn.datasets import load_breast_cancer, load_iris, load_wine

OUT = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "tests", "data")


def write(name, bunch, label):
    path = os.path.join(OUT, name)
    names = [n.replace(" ", "_").replace(",", "") for n in bunch.feature_names]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names + [label]) + "\n")
        for row, target in zip(bunch.data, bunch.target):
            cells = [repr(float(v)) for v in row]
            cells.append(str(bunch.target_names[target]))
            fh.write(",".join(cells) + "\n")
    print(f"wrote {path}")


def main():
    os.makedirs(OUT, exist_ok=True)
    write("iris.csv", load_iris(), "species")
    write("wine.csv", load_wine(), "wine_class")
    write("breast_cancer.csv", load_breast_cancer(), "diagnosis")


if __name__ == "__main__":
    main()
