"""Report rows and their deterministic CSV / JSON / plot-script emission."""
from dataclasses import dataclass, field
import csv
import io
import json
import math

FIELDS = ("experiment", "check", "params", "measured", "reference", "comparison",
          "tolerance", "passed")
COMPARISONS = ("le", "ge", "gt", "eq", "info")


def _verdict(measured, reference, comparison, tolerance):
    if comparison == "info":
        return None
    if math.isnan(measured) or math.isnan(reference):
        return False
    if comparison == "le":
        return measured <= reference + tolerance
    if comparison == "ge":
        return measured >= reference - tolerance
    if comparison == "gt":
        return measured > reference
    return abs(measured - reference) <= tolerance


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    check: str
    params: dict
    measured: float
    reference: float
    comparison: str = "le"
    tolerance: float = 0.0
    passed: object = None          # True / False / None (informational)
    runtime: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.comparison not in COMPARISONS:
            raise ValueError(f"unknown comparison {self.comparison!r}")
        # keep only the digits that get printed, so verdicts are auditable from the report
        for name in ("measured", "reference", "tolerance"):
            object.__setattr__(self, name, float(_num(float(getattr(self, name)))))
        want = _verdict(self.measured, self.reference, self.comparison, self.tolerance)
        if self.passed is None:
            object.__setattr__(self, "passed", want)
        elif self.passed != want:
            raise ValueError("passed flag disagrees with measured/reference")

    @classmethod
    def make(cls, experiment, check, params, measured, reference, comparison="le",
             tolerance=0.0, runtime=0.0):
        return cls(experiment, check, dict(params), measured, reference, comparison,
                   tolerance, None, runtime)


def _num(x):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = "%.10e" % x
    if math.isinf(float(s)):
        # rounding pushed past the largest double: truncate the mantissa instead
        m, e = ("%.15e" % x).split("e")
        s = m[:m.index(".") + 11] + "e" + e
    return s


def _params_text(params):
    def norm(v):
        if isinstance(v, float):
            return _num(v)
        if isinstance(v, (list, tuple)):
            return [norm(x) for x in v]
        if isinstance(v, dict):
            return {str(k): norm(x) for k, x in v.items()}
        return v
    return json.dumps(norm(params), sort_keys=True, separators=(",", ":"))


def _passed_text(p):
    return "info" if p is None else ("pass" if p else "fail")


def to_csv(rows, timings=False):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(FIELDS + (("runtime",) if timings else ()))
    for r in rows:
        line = [r.experiment, r.check, _params_text(r.params), _num(r.measured),
                _num(r.reference), r.comparison, _num(r.tolerance), _passed_text(r.passed)]
        if timings:
            line.append(_num(r.runtime))
        w.writerow(line)
    return buf.getvalue()


def to_json(rows, timings=False):
    parts = []
    for r in rows:
        items = [("experiment", json.dumps(r.experiment)), ("check", json.dumps(r.check)),
                 ("params", _params_text(r.params))]
        for name in ("measured", "reference"):
            v = getattr(r, name)
            items.append((name, _num(v) if math.isfinite(v) else json.dumps(_num(v))))
        items.append(("comparison", json.dumps(r.comparison)))
        items.append(("tolerance", _num(r.tolerance)))
        items.append(("passed", json.dumps(_passed_text(r.passed))))
        if timings:
            items.append(("runtime", _num(r.runtime)))
        parts.append("{" + ", ".join(f'"{k}": {v}' for k, v in items) + "}")
    return "[\n" + ",\n".join("  " + p for p in parts) + "\n]\n" if parts else "[]\n"


def _unnum(v):
    if isinstance(v, str):
        return float(v)
    return float(v)


def _unparams(obj):
    # numbers inside params were written as %.10e strings; restore floats
    if isinstance(obj, dict):
        return {k: _unparams(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unparams(v) for v in obj]
    if isinstance(obj, str):
        try:
            if "e" in obj or obj in ("nan", "inf", "-inf"):
                return float(obj)
        except ValueError:
            pass
    return obj


def from_json(text):
    rows = []
    for d in json.loads(text):
        passed = {"pass": True, "fail": False, "info": None}[d["passed"]]
        rows.append(ReportRow(d["experiment"], d["check"], _unparams(d["params"]),
                              _unnum(d["measured"]), _unnum(d["reference"]),
                              d["comparison"], _unnum(d["tolerance"]), passed,
                              float(d.get("runtime", 0.0))))
    return rows


def emit(rows, fmt, path, timings=False):
    text = to_csv(rows, timings) if fmt == "csv" else to_json(rows, timings)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


PLOT_TEMPLATE = '''"""Plot measured vs reference values from {csv_name}. Needs matplotlib."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name!r}
with open(path, newline="", encoding="utf-8") as fh:
    rows = [r for r in csv.DictReader(fh) if r["comparison"] != "info"]
labels = [r["experiment"] + ":" + r["check"] for r in rows]
measured = [float(r["measured"]) for r in rows]
reference = [float(r["reference"]) for r in rows]
colors = ["tab:green" if r["passed"] == "pass" else "tab:red" for r in rows]
fig, ax = plt.subplots(figsize=(8, 0.35 * len(rows) + 1.5))
ypos = range(len(rows))
ax.scatter(measured, ypos, c=colors, label="measured")
ax.scatter(reference, ypos, marker="|", s=200, c="k", label="reference")
ax.set_yticks(list(ypos))
ax.set_yticklabels(labels, fontsize=7)
ax.set_xscale("symlog", linthresh=1e-6)
ax.legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=120)
'''


def emit_plotscript(rows, path, csv_name="report.csv"):
    text = PLOT_TEMPLATE.format(csv_name=csv_name)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write plot script to {path}: {exc}") from exc
    return path
