"""Command-line front end: coefficient tables, scenario reports, resonance scans, oracle checks."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, fields
from dataclasses import field as dc_field
from typing import Sequence

import numpy as np

from . import bogoliubov as bg
from .core import DIRAC, SCALAR, CavityConfig, DomainError, OrderSeries, Segment, Trajectory, tau_from_u
from .scenarios import RegimeError, ScenarioResult, resonance_scan, run_scenario_A, run_scenario_B

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_ORACLE = 0, 1, 2, 3

FIELDS = {"scalar": SCALAR, "dirac": DIRAC, SCALAR: SCALAR, DIRAC: DIRAC}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    field: str = "scalar"
    delta: float = 1.0
    n_max: int = 12
    h: float = 0.01
    blocks: int = 1
    tau: float | None = None
    u: float | None = None
    modes: list | None = None
    sign: int = 1
    allow_large_Nh: bool = False
    conjugate_phases: bool = False
    reversed_ordering: bool = False
    seed: int = 0
    samples: int = 0
    pairs: list = dc_field(default_factory=lambda: [[1, 2], [2, 3]])
    label_range: int = 5
    kernel: str | None = None
    u_min: float = 0.0
    u_max: float = 1.2
    u_steps: int = 600
    oracle: bool = False
    output: str | None = None
    csv: str | None = None
    svg: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self):
        if self.field not in FIELDS:
            raise ConfigError(f"field must be one of scalar, dirac (got {self.field!r})")
        if self.tau is not None and self.u is not None:
            raise ConfigError("give tau or u, not both")
        if int(self.blocks) != self.blocks or self.blocks < 0:
            raise ConfigError("blocks must be a non-negative integer")
        if self.sign not in (1, -1):
            raise ConfigError("sign must be +1 or -1")
        try:
            self.pairs = [[int(p[0]), int(p[1])] for p in self.pairs]
        except (TypeError, ValueError, IndexError):
            raise ConfigError("pairs must be a list of [m, n]") from None
        if self.modes is not None:
            self.modes = [int(x) for x in self.modes]
        allowed = ("A1",) if FIELDS[self.field] == DIRAC else ("alpha1", "beta1")
        if self.kernel is not None and self.kernel not in allowed:
            raise ConfigError(f"kernel must be one of {', '.join(allowed)} for this field")

    @property
    def cavity(self) -> CavityConfig:
        return CavityConfig(self.delta, FIELDS[self.field], int(self.n_max))

    def trajectory(self) -> Trajectory:
        if self.h == 0 or self.blocks == 0:
            # nothing accelerates: one inertial stretch of the same total length
            return Trajectory([Segment.inertial(self.tau or 2.0 * self.delta)])
        if self.u is not None:
            tau = tau_from_u(self.h, self.u, self.delta)
        else:
            tau = self.tau if self.tau is not None else 2.0 * self.delta
        return Trajectory.blocks(self.h, tau, int(self.blocks))


# -- serialisation -------------------------------------------------------------


def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def series_to_json(s: OrderSeries) -> dict:
    return {"c0": _cplx(s.c0), "c1": _cplx(s.c1), "c2": _cplx(s.c2)}


def series_from_json(d: dict) -> OrderSeries:
    return OrderSeries(*(complex(*d[k]) for k in ("c0", "c1", "c2")))


def _jsonable(x):
    if isinstance(x, OrderSeries):
        return series_to_json(x)
    if isinstance(x, (complex, np.complexfloating)):
        return _cplx(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def result_to_json(res: ScenarioResult) -> dict:
    out = {
        "scenario": res.scenario,
        "statistics": res.statistics,
        "modes": list(res.modes),
        "h": res.h,
        "n_accelerated": res.n_accelerated,
        "witnesses": {
            name: {
                "value": series_to_json(w.value),
                "value_at_h": _cplx(w.value(res.h)),
                "leading_order": w.leading_order,
                "status": w.status,
                "violated": w.violated,
                "elements": _jsonable(w.elements),
            }
            for name, w in res.witnesses.items()
        },
        "negativities": _jsonable(res.negativities),
        "fidelities": _jsonable(res.fidelities),
        "mixedness": _jsonable(res.mixedness),
        "kernels": _jsonable(res.kernels),
        "warnings": list(res.warnings),
    }
    if "dicke" in res.fidelities:
        out["dicke_fidelity"] = series_to_json(res.fidelities["dicke"])
    if "w" in res.fidelities:
        out["w_fidelity"] = series_to_json(res.fidelities["w"])
    return out


def load_report(text: str) -> dict:
    """Parse a JSON report, turning every {"c0","c1","c2"} object back into an OrderSeries."""

    def hook(d):
        if set(d) == {"c0", "c1", "c2"}:
            return series_from_json(d)
        return d

    return json.loads(text, object_hook=hook)


def fmt(x: float) -> str:
    return "%.17g" % x


# -- commands -----------------------------------------------------------------------


def coeff_rows(rc: RunConfig):
    """Rows (name, m, n, value, oracle-or-None) of first-order kernels per unit h."""
    cav = rc.cavity
    labels = [l for l in cav.basis().indices if abs(l) <= rc.label_range]
    if rc.blocks <= 1 and rc.tau is None and rc.u is None:
        bmap = bg.switch_map(cav, rc.h if rc.h else None)
    else:
        bmap = bg.compile_trajectory(cav, rc.trajectory(), rc.h or None)
    name = rc.kernel or ("A1" if cav.is_fermionic else "beta1")
    oracle = None
    if rc.oracle:
        oracle = bg.oracle_first_order(cav.field_kind, labels)
    rows = []
    for i, m in enumerate(labels):
        for j, n in enumerate(labels):
            v = bmap.entry(name, m, n)
            o = None
            if oracle is not None:
                o = complex(oracle[1 if name == "beta1" else 0][i, j])
            rows.append((name, m, n, v, o))
    return rows


def cmd_coeffs(rc: RunConfig, out) -> int:
    rows = coeff_rows(rc)
    header = ["m", "n", "re", "im", "abs"]
    if rc.oracle:
        header += ["kernel", "oracle_re", "oracle_im", "disagreement"]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    worst = 0.0
    for name, m, n, v, o in rows:
        row = [m, n, fmt(v.real), fmt(v.imag), fmt(abs(v))]
        if rc.oracle:
            d = abs(v - o)
            worst = max(worst, d)
            row += [name, fmt(o.real), fmt(o.imag), fmt(d)]
        w.writerow(row)
    if rc.oracle and worst > 1e-8:
        print(f"oracle disagreement {worst:.3e} exceeds 1e-8", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


def cmd_scenario(which: str, rc: RunConfig, out) -> int:
    cav = rc.cavity
    if rc.modes is None:
        if which == "a":
            rc.modes = [1, -2] if cav.is_fermionic else [1, 2]
        else:
            rc.modes = [1, 3, -2] if cav.is_fermionic else [1, 2, 3]
    traj = rc.trajectory()
    kw = dict(allow_large_Nh=rc.allow_large_Nh, conjugate_phases=rc.conjugate_phases,
              reversed_ordering=rc.reversed_ordering)
    if which == "a":
        res = run_scenario_A(cav, traj, rc.h, rc.modes, sign=rc.sign, **kw)
    else:
        res = run_scenario_B(cav, traj, rc.h, rc.modes, **kw)
    report = result_to_json(res)
    # output paths are left out so that reports do not depend on where they were written
    report["config"] = {k: v for k, v in asdict(rc).items() if k not in ("output", "csv", "svg")}
    text = json.dumps(report, indent=2, sort_keys=True)
    _emit(text + "\n", rc.output, out)
    return EXIT_OK


def scan_csv(scan) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(scan.values)
    w.writerow(["u"] + [f"beta1_{m}_{n}" for m, n in keys])
    for i, u in enumerate(scan.u):
        w.writerow([fmt(u)] + [fmt(scan.values[k][i]) for k in keys])
    return buf.getvalue()


_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def scan_svg(scan, width: int = 640, height: int = 400) -> str:
    """Minimal line plot: one polyline per pair, dashed markers at predicted resonances."""
    pad = 40
    u = scan.u
    umin, umax = float(u[0]), float(u[-1])
    ymax = max(float(np.max(v)) for v in scan.values.values()) or 1.0
    span = (umax - umin) or 1.0

    def px(x):
        return pad + (x - umin) / span * (width - 2 * pad)

    def py(y):
        return height - pad - y / ymax * (height - 2 * pad)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 8}" font-size="12" text-anchor="middle">u</text>',
    ]
    for c, (key, vals) in enumerate(scan.values.items()):
        col = _COLOURS[c % len(_COLOURS)]
        for x in scan.predicted[key]:
            if umin <= x <= umax:
                lines.append(f'<line x1="{px(x):.3f}" y1="{pad}" x2="{px(x):.3f}" y2="{height - pad}" '
                             f'stroke="{col}" stroke-dasharray="4 3" stroke-width="0.8"/>')
        pts = " ".join(f"{px(float(x)):.3f},{py(float(y)):.3f}" for x, y in zip(u, vals))
        lines.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.2" points="{pts}"/>')
        lines.append(f'<text x="{width - pad - 90}" y="{pad + 14 * (c + 1)}" font-size="12" '
                     f'fill="{col}">|beta1_{key[0]}_{key[1]}|</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_resonance_scan(rc: RunConfig, out) -> int:
    scan = resonance_scan(rc.cavity, rc.h, int(rc.blocks), [tuple(p) for p in rc.pairs],
                          (rc.u_min, rc.u_max), int(rc.u_steps), allow_large_Nh=rc.allow_large_Nh)
    _emit(scan_csv(scan), rc.csv, out)
    if rc.svg:
        with open(rc.svg, "w", encoding="utf-8", newline="\n") as f:
            f.write(scan_svg(scan))
    return EXIT_OK


def cmd_oracle_check(rc: RunConfig, out) -> int:
    report = {}
    status = EXIT_OK
    for name, kind in (("scalar", SCALAR), ("dirac", DIRAC)):
        try:
            dev = bg.verify_closed_forms(kind, max_label=rc.label_range)
            report[name] = {"ok": True, "max_deviation": dev}
        except bg.ClosedFormMismatch as e:
            report[name] = {"ok": False, "error": str(e)}
            status = EXIT_ORACLE
    if rc.samples:
        from .entanglement import WITNESSES, sampler_max

        report["witness_sampler_max"] = {
            name: sampler_max(name, rc.samples, rc.seed) for name in sorted(WITNESSES)
        }
    _emit(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n", rc.output, out)
    return status


def _emit(text: str, path: str | None, out):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        out.write(text)


# -- argument handling ------------------------------------------------------------------


def _pair(text: str) -> list:
    try:
        m, n = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected m,n, got {text!r}") from None
    return [m, n]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="movingcavity", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("coeffs", "scenario-a", "scenario-b", "resonance-scan", "oracle-check"):
        s = sub.add_parser(name)
        s.add_argument("config", nargs="?", help="JSON config file")
        s.add_argument("--field", choices=("scalar", "dirac"))
        s.add_argument("--h", type=float)
        s.add_argument("--n-max", type=int, dest="n_max")
        s.add_argument("--blocks", type=int)
        s.add_argument("--tau", type=float)
        s.add_argument("--u", type=float)
        s.add_argument("--pair", type=_pair, action="append", dest="pairs")
        s.add_argument("--modes", type=lambda t: [int(x) for x in t.split(",")])
        s.add_argument("--seed", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--range", type=int, dest="label_range")
        s.add_argument("--kernel", choices=("alpha1", "beta1", "A1"))
        s.add_argument("--u-steps", type=int, dest="u_steps")
        s.add_argument("--u-max", type=float, dest="u_max")
        s.add_argument("--allow-large-Nh", action="store_true", default=None, dest="allow_large_Nh")
        s.add_argument("--oracle", action="store_true", default=None)
        s.add_argument("-o", "--output")
        s.add_argument("--csv")
        s.add_argument("--svg")
    return p


def load_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        data[key] = val
    try:
        return RunConfig.from_dict(data)
    except TypeError as e:
        raise ConfigError(str(e)) from None


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        rc = load_config(args)
        if args.command == "coeffs":
            return cmd_coeffs(rc, out)
        if args.command == "scenario-a":
            return cmd_scenario("a", rc, out)
        if args.command == "scenario-b":
            return cmd_scenario("b", rc, out)
        if args.command == "resonance-scan":
            return cmd_resonance_scan(rc, out)
        return cmd_oracle_check(rc, out)
    except RegimeError as e:
        print(f"error: {e} (pass --allow-large-Nh to override)", file=sys.stderr)
        return EXIT_REGIME
    except (bg.ClosedFormMismatch, bg.OracleConvergenceError) as e:
        print(f"oracle error: {e}", file=sys.stderr)
        return EXIT_ORACLE
    except (ConfigError, DomainError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
