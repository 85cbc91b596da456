#!/usr/bin/env python3
"""Export the benchmark datasets bundled with scikit-learn to flat CSV files.

Writes iris.csv, digits.csv and wdbc.csv into the data/ directory. Every file
has a header row, numeric feature columns and a trailing `label` column.
Iris labels are species names; the other two use integer labels.
"""
import csv
import os
import sys

from sklearn.datasets import load_breast_cancer, load_digits, load_iris


def write(path, names, rows, labels):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + ["label"])
        for row, label in zip(rows, labels):
            w.writerow([repr(float(v)) if not float(v).is_integer() else int(v) for v in row] + [label])


def main(out_dir):
    os.makedirs(out_dir, exist_ok=True)

    iris = load_iris()
    names = [n.replace(" (cm)", "").replace(" ", "_") for n in iris.feature_names]
    write(os.path.join(out_dir, "iris.csv"), names, iris.data,
          [iris.target_names[t] for t in iris.target])

    digits = load_digits()
    write(os.path.join(out_dir, "digits.csv"), [f"px{i}" for i in range(64)],
          digits.data, digits.target)

    # Wisconsin diagnostic breast cancer; 0 = malignant, 1 = benign.
    wdbc = load_breast_cancer()
    names = [n.replace(" ", "_") for n in wdbc.feature_names]
    write(os.path.join(out_dir, "wdbc.csv"), names, wdbc.data, wdbc.target)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data"))
