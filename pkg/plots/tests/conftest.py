"""Shared table builders for the figure tests.

Tables are written in the simulation CLI's documented schemas; nothing
here imports the simulation package.
"""

import csv

SWEEP_HEADER = ["family", "N", "a", "kappa", "gamma",
                "eq_residual", "max_real_part", "Omega"]
MOMENTS_HEADER = ["t", "blob", "cx", "cy", "cz",
                  "I", "m1", "m2", "m3", "R", "exit_time"]


def write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def sweep_rows(a_values=(0.1, 0.3), gammas=(-1.0, 0.0, 1.0)):
    rows = []
    for a in a_values:
        for g in gammas:
            rows.append(["four-vortex", "4", repr(a), "0.5", repr(g),
                         "1e-12", repr(abs(g) * a + 0.01), "0.1"])
    return rows


def moments_rows(exit_times=None):
    """Two blobs over three times; exit_times maps blob id -> value."""
    exit_times = exit_times or {}
    rows = []
    for t in (0.0, 0.1, 0.2):
        for blob in (1, 2):
            rows.append([repr(t), str(blob), "0.0", "0.0", "1.0",
                         repr(1e-3 * (1.0 + t) * blob), "1e-4", "1e-6",
                         "1e-8", repr(1e-2 * (1.0 + t)),
                         str(exit_times.get(blob, ""))])
    return rows
