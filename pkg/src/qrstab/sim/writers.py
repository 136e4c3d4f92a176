"""CSV output for trajectories (RFC 4180, CRLF, 12 significant digits).

DES files start with ``#`` comment lines naming the PRNG algorithm and
seed; the rest of every file is a plain RFC 4180 table.
"""

from __future__ import annotations

import csv
import io

import numpy as np


def _num(x) -> str:
    return format(float(x), ".12g")


def _table(header: list[str], columns: list[np.ndarray], comments: list[str]) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    data = np.column_stack(columns)
    for row in data:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def fluid_csv(traj) -> str:
    K, J = traj.Z.shape[1], traj.W.shape[1]
    header = (["time"] + [f"Z_{k + 1}" for k in range(K)] + [f"W_{j + 1}" for j in range(J)]
              + [f"eps_{k + 1}" for k in range(K)])
    return _table(header, [traj.times, traj.Z, traj.W, traj.eps], [])


def skorohod_csv(traj) -> str:
    J = traj.W.shape[1]
    header = ["time"] + [f"W_{j + 1}" for j in range(J)] + [f"Y_{j + 1}" for j in range(J)]
    return _table(header, [traj.times, traj.W, traj.Y], [])


def des_csv(traj) -> str:
    K = traj.Z.shape[1]
    header = ["time"] + [f"Z_{k + 1}" for k in range(K)] + ["total"]
    return _table(header, [traj.times, traj.Z, traj.total],
                  [f"prng={traj.algorithm}", f"seed={traj.seed}", f"events={traj.events}"])
