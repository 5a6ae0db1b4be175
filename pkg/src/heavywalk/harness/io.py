"""CSV tables emitted by a run. The ``seed`` column holds the replica index ``i``;
its stream is derived from ``(master_seed, i)``."""
import csv
import json
from pathlib import Path

WALK_COLUMNS = ("seed", "t", "x", "run_min", "run_max", "max_inc")
STOPPING_COLUMNS = ("seed", "level", "tau", "lambda", "tau_censored", "lambda_unresolved")
EXCURSION_COLUMNS = ("seed", "n", "sigma", "nu")
STRIP_COLUMNS = ("seed", "t", "u_is_boundary", "v")


class CsvSink:
    """Single-owner writer: the aggregator feeds replicas in index order."""

    def __init__(self, out_dir, model_type, want_stopping):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._files = []
        self.traj = self._open("strip_checkpoints.csv" if model_type == "strip" else "walk_checkpoints.csv",
                               STRIP_COLUMNS if model_type == "strip" else WALK_COLUMNS)
        self.stop = self._open("stopping.csv", STOPPING_COLUMNS) if want_stopping else None
        self.exc = self._open("excursions.csv", EXCURSION_COLUMNS) if model_type == "strip" else None

    def _open(self, name, header):
        fh = open(self.dir / name, "w", newline="")
        w = csv.writer(fh)
        w.writerow(header)
        self._files.append(fh)
        return w

    def write(self, rec):
        i = rec.index
        tr = rec.trajectory
        if tr is not None:
            if rec.on_boundary is not None:
                for t, b, v in zip(tr.times, rec.on_boundary, tr.values):
                    self.traj.writerow((i, int(t), int(bool(b)), repr(float(v))))
            else:
                for row in zip(tr.times, tr.values, tr.run_min, tr.run_max, tr.max_inc):
                    self.traj.writerow((i, int(row[0]), *(repr(float(v)) for v in row[1:])))
        if self.stop is not None and rec.stopping is not None:
            s = rec.stopping
            for j, lev in enumerate(s.levels):
                self.stop.writerow((i, repr(float(lev)), int(s.tau_times[j]), int(s.lam_times[j]),
                                    int(bool(s.tau_censored[j])), int(bool(s.lam_unresolved[j]))))
        if self.exc is not None and rec.sigma is not None:
            sig = rec.sigma
            for n in range(1, len(sig)):
                self.exc.writerow((i, n, int(sig[n]), int(sig[n] - sig[n - 1])))

    def close(self):
        for fh in self._files:
            fh.close()


def write_report(path, report):
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
