"""Result files: CSV/JSON tables and the run manifest."""
import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .experiments import ScenarioConfig

CSV_HEADER = ["case", "detector", "gamma", "l_hat", "sigma2_tap", "delta", "snr_db",
              "symbols", "errors", "ser", "ci95", "seed"]


@dataclass
class RunManifest:
    configs: list
    results: list = field(default_factory=list)
    seed: int = None
    duration_s: float = 0.0
    version: str = __version__
    created: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%S%z"))

    def to_dict(self):
        return {
            "tool": "bcjrlab",
            "version": self.version,
            "created": self.created,
            "seed": self.seed,
            "duration_s": self.duration_s,
            "configs": [c.to_dict() for c in self.configs],
            "results": [result_record(r) for r in self.results],
        }


def _num(x):
    return "" if x is None else f"{x:.6g}"


def _int(x):
    return "" if x is None else str(int(x))


def _sort_key(r):
    variant = {1: r.l_hat, 2: r.delta, 6: r.l_hat}.get(r.case_id, r.sigma2_tap)
    return (r.case_id, r.detector, r.gamma, -1 if variant is None else variant,
            r.l_hat or 0, r.sigma2_tap or 0.0, r.delta or 0.0, r.snr_db, r.seed)


def sorted_results(results):
    return sorted(results, key=_sort_key)


def result_record(r):
    return {"case": r.case_id, "detector": r.detector, "gamma": r.gamma, "l_hat": r.l_hat,
            "sigma2_tap": r.sigma2_tap, "delta": r.delta, "snr_db": r.snr_db,
            "symbols": r.symbols, "errors": r.symbol_errors, "ser": r.ser,
            "ci95": r.ci95_halfwidth, "seed": r.seed}


def csv_rows(results):
    for r in sorted_results(results):
        yield [str(r.case_id), r.detector, _num(r.gamma), _int(r.l_hat), _num(r.sigma2_tap),
               _num(r.delta), _num(r.snr_db), str(r.symbols), str(r.symbol_errors),
               _num(r.ser), _num(r.ci95_halfwidth), str(r.seed)]


def format_csv(results):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(csv_rows(results))
    return buf.getvalue()


def write_results(manifest, output_dir, fmt="csv"):
    """Write the result table and ``manifest.json``; returns the written paths."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown output format {fmt!r}")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        table = out / "results.csv"
        table.write_text(format_csv(manifest.results))
    else:
        table = out / "results.json"
        rows = [result_record(r) for r in sorted_results(manifest.results)]
        table.write_text(json.dumps(rows, indent=2) + "\n")
    man = out / "manifest.json"
    man.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    return table, man


def configs_from_manifest(data):
    """Rebuild the configuration grid stored in a manifest (dict or path)."""
    if not isinstance(data, dict):
        data = json.loads(Path(data).read_text())
    return [ScenarioConfig(**c) for c in data["configs"]]
