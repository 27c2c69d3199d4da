"""Command-line front end.

Modes: ``breakdown`` (all parts of chi per state and Z), ``table`` (ratios
to chi, one row per Z), ``crossover`` (first Z where |chi_d| >= |chi_p|)
and ``verify`` (oracle checks with pass/fail lines).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

from .errors import DiracMagError
from .hydrogenic import QuantumState, parse_state_label
from .magnet import chi_ground_closed_forms, chi_p_dprime, chi_total, crossover_scan
from .precision import ALPHA_INVERSE_1986, ALPHA_INVERSE_2018, PrecisionPolicy, alpha_from_inverse

TABLE_STATES = {
    1: ("2s1/2", "1/2"),
    2: ("2p1/2", "1/2"),
    3: ("2p3/2", "1/2"),
    4: ("2p3/2", "3/2"),
}
TABLE_Z = (1, 2, 3, 4, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 135, 136, 137)
CROSSOVER_STATES = (("2p1/2", "1/2"), ("2p3/2", "1/2"), ("3p1/2", "1/2"), ("3p3/2", "1/2"))
VERIFY_STATES = (("2s1/2", "1/2"), ("2p1/2", "1/2"), ("2p3/2", "1/2"), ("2p3/2", "3/2"), ("3p1/2", "1/2"))
VERIFY_Z = (1, 20, 80, 137)

BREAKDOWN_FIELDS = ("chi_d", "chi_p_prime_plus", "chi_p_prime_minus", "chi_p_dprime", "chi_p", "chi_total")
RATIO_FIELDS = ("chi_d", "chi_p_prime", "chi_p_dprime", "chi_p")


def format_sci(x) -> str:
    """Fixed scientific notation: sign, 13 significant digits, two-digit signed exponent."""
    d = Decimal(x) if isinstance(x, (int, float)) else Decimal(str(x))
    if d == 0:
        return ("-" if d.is_signed() else "+") + "0.000000000000e+00"
    mant, exp = f"{d:+.12e}".split("e")
    return f"{mant}e{int(exp):+03d}"


def _json_number(x) -> float:
    return float(Decimal(format_sci(x)))


def parse_z(text: str) -> list[int]:
    """Parse ``"5"``, ``"1..137"`` or comma-separated combinations of both."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            a, b = part.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError(f"empty charge range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out or any(z < 1 for z in out):
        raise ValueError(f"charges must be positive integers, got {text!r}")
    return sorted(set(out))


@dataclass
class RunConfig:
    alpha_inverse: str = ALPHA_INVERSE_2018
    precision: PrecisionPolicy = field(default_factory=PrecisionPolicy)
    output_format: str = "tsv"
    states: list = field(default_factory=list)
    z_values: list = field(default_factory=list)
    mode: str = "breakdown"
    units: str = "coefficient"
    jobs: int = 1
    max_nprime: int = 2000

    def __post_init__(self):
        if not self.precision.is_fast and self.precision.digits < 30:
            raise ValueError("extended precision needs at least 30 digits on the command line")
        if self.output_format not in ("tsv", "csv", "jsonl"):
            raise ValueError(f"unknown output format {self.output_format!r}")

    @property
    def alpha(self):
        return alpha_from_inverse(self.alpha_inverse, self.precision)


def _resolved_states(config: RunConfig, warn) -> list:
    states = []
    for label, mu in config.states:
        states.append((label, parse_state_label(label, Fraction(mu))))
    return states


def _admissible(state: QuantumState, Z: int, config: RunConfig) -> bool:
    return float(config.alpha * Z) < abs(state.kappa)


@dataclass(frozen=True)
class Row:
    """One computed (state, Z) row as decimal strings, safe to pass between processes."""

    label: str
    mu: str
    z: int
    values: dict
    ratios: dict
    accuracy_estimate: float


def _decimal_text(x) -> str:
    return str(Decimal(x)) if isinstance(x, (int, float)) else str(x)


def _compute_row(args):
    label, state, Z, config = args
    try:
        b = chi_total(state, Z, config.alpha, config.precision)
    except DiracMagError as exc:
        return label, Z, None, str(exc)
    scale = config.alpha**2 if config.units == "a0" else 1
    values = {name: _decimal_text(getattr(b, name) * scale) for name in BREAKDOWN_FIELDS}
    ratios = {name: _decimal_text(v) for name, v in b.ratios().items()}
    return label, Z, Row(label, str(state.mu), Z, values, ratios, float(b.accuracy_estimate)), None


def _rows(config: RunConfig, warn):
    tasks = []
    for label, state in _resolved_states(config, warn):
        for Z in config.z_values:
            if not _admissible(state, Z, config):
                warn(f"warning: skipping {label} at Z={Z}: alpha*Z >= |kappa| for alpha^-1={config.alpha_inverse}")
                continue
            tasks.append((label, state, Z, config))
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            return list(pool.map(_compute_row, tasks))
    return [_compute_row(t) for t in tasks]


class _Writer:
    def __init__(self, stream, fmt):
        self.stream = stream
        self.fmt = fmt

    def header(self, names):
        if self.fmt != "jsonl":
            self.row(names)

    def row(self, cells):
        sep = "\t" if self.fmt == "tsv" else ","
        self.stream.write(sep.join(str(c) for c in cells) + "\n")

    def record(self, obj):
        self.stream.write(json.dumps(obj, sort_keys=False) + "\n")


def _record(row: Row) -> dict:
    obj = {"z": row.z, "state": row.label, "mu": row.mu}
    for name in BREAKDOWN_FIELDS:
        obj[name] = _json_number(row.values[name])
    obj["ratios"] = {name: _json_number(v) for name, v in row.ratios.items()}
    obj["accuracy_estimate"] = float(f"{row.accuracy_estimate:.3e}")
    return obj


def run_breakdown(config: RunConfig, stream, warn) -> int:
    w = _Writer(stream, config.output_format)
    status = 0
    w.header(("state", "mu", "z") + BREAKDOWN_FIELDS + ("accuracy_estimate",))
    for label, Z, row, err in _rows(config, warn):
        if row is None:
            warn(f"error: {label} Z={Z}: {err}")
            status = 1
            continue
        if config.output_format == "jsonl":
            w.record(_record(row))
        else:
            cells = [row.label, row.mu, row.z] + [format_sci(row.values[f]) for f in BREAKDOWN_FIELDS]
            w.row(cells + [f"{row.accuracy_estimate:.3e}"])
    return status


def run_table(config: RunConfig, stream, warn) -> int:
    w = _Writer(stream, config.output_format)
    status = 0
    w.header(("z",) + tuple(f"{f}_ratio" for f in RATIO_FIELDS))
    for label, Z, row, err in _rows(config, warn):
        if row is None:
            warn(f"error: {label} Z={Z}: {err}")
            status = 1
            continue
        if config.output_format == "jsonl":
            w.record(_record(row))
        else:
            w.row([row.z] + [format_sci(row.ratios[f]) for f in RATIO_FIELDS])
    return status


def run_crossover(config: RunConfig, stream, warn) -> int:
    w = _Writer(stream, config.output_format)
    lo, hi = min(config.z_values), max(config.z_values)
    status = 0
    w.header(("state", "mu", "z_min", "z_max", "z_c"))
    for label, state in _resolved_states(config, warn):
        top = hi
        while top >= lo and not _admissible(state, top, config):
            top -= 1
        if top < hi:
            warn(f"warning: {label} scan truncated at Z={top}")
        try:
            zc = crossover_scan(state, config.alpha, (lo, top), config.precision) if top >= lo else None
        except DiracMagError as exc:
            warn(f"error: {label}: {exc}")
            status = 1
            continue
        if config.output_format == "jsonl":
            w.record({"state": label, "mu": str(state.mu), "z_min": lo, "z_max": top, "z_c": zc})
        else:
            w.row([label, str(state.mu), lo, top, "none" if zc is None else zc])
    return status


@dataclass
class Check:
    name: str
    subject: str
    measured: float
    threshold: float
    passed: bool
    note: str = ""
    gating: bool = True

    @property
    def result(self) -> str:
        if not self.gating:
            return "INFO"
        return "PASS" if self.passed else "FAIL"


def _verify_checks(config: RunConfig, warn):
    from . import oracle
    from .hydrogenic import bound_radial, relativistic_params

    policy = config.precision
    alpha = config.alpha
    trunc = oracle.SeriesTruncation(
        max_abs_nprime=config.max_nprime,
        quadrature_order=150 if policy.is_fast else 400,
    )
    if policy.is_fast:
        warn("warning: fast64 limits spot-check quadrature to order 150")
    checks = []
    seen_series = set()
    for label, state in _resolved_states(config, warn):
        for Z in config.z_values:
            subject = f"{label} mu={state.mu} Z={Z}"
            if not _admissible(state, Z, config):
                warn(f"warning: skipping {subject}: no bound state")
                continue
            aZ = alpha * Z
            stage = "moments"
            try:
                P, Q = bound_radial(state, aZ, policy)
                closed = oracle.closed_form_moments(state, aZ, policy)
                q1 = oracle.radial_integral_quadrature(P, P, 2).value - oracle.radial_integral_quadrature(Q, Q, 2).value
                q2 = oracle.radial_integral_quadrature(P, Q, 1).value
                for name, q, c in (("moment_r2", q1, closed["r2_large_minus_small"]),
                                   ("moment_r1", q2, closed["r_large_small"])):
                    dev = float(abs(q - c) / abs(c))
                    checks.append(Check(name, subject, dev, 1e-9, dev <= 1e-9))
                stage = "gamma_sum_identity"
                dev = oracle.gamma_sum_identity_residual(state, aZ, policy)
                checks.append(Check("gamma_sum_identity", subject, dev, 1e-12, dev <= 1e-12))
                stage = "kappa_cancellation"
                cancel = oracle.chi_p_kappa_cancellation(state, Z, alpha, trunc, policy)
                checks.append(Check("kappa_cancellation", subject, cancel.relative, 1e-8, cancel.relative <= 1e-8))
                for channel in (1, -1):
                    kp = -state.kappa + channel
                    key = (state.n, state.kappa, Z, channel)
                    if kp == 0 or key in seen_series:
                        continue
                    seen_series.add(key)
                    stage = "series_vs_closed"
                    from .magnet import r_channel

                    series = oracle.r_series_truncated(state, Z, channel, alpha, trunc, policy)
                    closed_r = r_channel(state, aZ, channel, policy).r_reduced
                    dev = float(abs(series.value - closed_r) / abs(closed_r))
                    note = f"tail_estimate={series.relative_tail:.2e} spot_checks={series.spot_checks}"
                    if series.relative_tail > 1e-8:
                        warn(f"warning: {subject} kappa'={kp}: relative tail estimate {series.relative_tail:.2e} at M={trunc.max_abs_nprime}")
                    checks.append(Check("series_vs_closed", f"{subject} kappa'={kp}", dev, 1e-8, dev <= 1e-8, note))
                stage = "closed_forms"
                b = chi_total(state, Z, alpha, policy)
                if b.accuracy_estimate > 1e-12:
                    warn(f"warning: {subject}: estimated relative accuracy only {b.accuracy_estimate:.2e}")
                if state.n == 0 and state.kappa == -1:
                    cd, cp = chi_ground_closed_forms(Z, alpha, policy)
                    dev = max(float(abs(cd / b.chi_d - 1)), float(abs(cp / b.chi_p - 1)))
                    checks.append(Check("ground_state_forms", subject, dev, 1e-12, dev <= 1e-12))
            except DiracMagError as exc:
                checks.append(Check(stage, subject, float("nan"), 0.0, False, f"error: {exc}"))

    # Ground state at Z = 120 against the published ratios; only the 1986 run gates.
    targets = {"chi_p_dprime_ratio": Decimal("-1.136288773734"), "chi_p_ratio": Decimal("-1.122168785351")}
    for inverse, gating in ((ALPHA_INVERSE_1986, True), (ALPHA_INVERSE_2018, False)):
        a = alpha_from_inverse(inverse, policy)
        ground = QuantumState(0, -1)
        cd, cp = chi_ground_closed_forms(120, a, policy)
        dd = chi_p_dprime(ground, 120, a, policy)
        got = {"chi_p_dprime_ratio": dd / (cd + cp), "chi_p_ratio": cp / (cd + cp)}
        for name, target in targets.items():
            dev = float(abs(Decimal(format_sci(got[name])) - target) / abs(target))
            checks.append(Check(f"ground_z120_{name}", f"alpha^-1={inverse}", dev, 1e-12, dev <= 1e-12, gating=gating))
    return checks


def run_verify(config: RunConfig, stream, warn) -> int:
    w = _Writer(stream, config.output_format)
    checks = _verify_checks(config, warn)
    if config.output_format == "jsonl":
        for c in checks:
            w.record({"check": c.name, "subject": c.subject, "measured": c.measured,
                      "threshold": c.threshold, "pass": c.passed, "gating": c.gating, "note": c.note})
    else:
        w.header(("check", "subject", "measured", "threshold", "result", "note"))
        for c in checks:
            w.row([c.name, c.subject, f"{c.measured:.3e}", f"{c.threshold:.0e}", c.result, c.note])
    return 0 if all(c.passed for c in checks if c.gating) else 1


MODES = {"breakdown": run_breakdown, "table": run_table, "crossover": run_crossover, "verify": run_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diracmag", description="Dia- and paramagnetic parts of Dirac one-electron magnetizabilities.")
    p.add_argument("--mode", choices=sorted(MODES), default="breakdown")
    p.add_argument("--state", action="append", help="state label such as 2p3/2 (repeatable)")
    p.add_argument("--mu", default="1/2", help="magnetic quantum number as p/q (default 1/2)")
    p.add_argument("--table", type=int, choices=sorted(TABLE_STATES), help="preset state of a published table")
    p.add_argument("--z", help="charge: N, a..b, or a comma list of those")
    p.add_argument("--alpha-inverse", default=ALPHA_INVERSE_2018)
    p.add_argument("--precision", default="extended:50", help="fast64 or extended:N (N >= 30)")
    p.add_argument("--format", dest="output_format", choices=("tsv", "csv", "jsonl"), default="tsv")
    p.add_argument("--units", choices=("coefficient", "a0"), default="coefficient",
                   help="coefficient of alpha^2 a0^3 (default) or values in a0^3")
    p.add_argument("--out", default="-", help="output path, or - for stdout")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for rows")
    p.add_argument("--max-nprime", type=int, default=2000, help="series truncation in verify mode")
    return p


def config_from_args(ns) -> RunConfig:
    if ns.table is not None:
        states = [TABLE_STATES[ns.table]]
    elif ns.state:
        states = [(s, ns.mu) for s in ns.state]
    elif ns.mode == "crossover":
        states = list(CROSSOVER_STATES)
    elif ns.mode == "verify":
        states = list(VERIFY_STATES)
    else:
        raise ValueError("give --state or --table")
    if ns.z:
        zs = parse_z(ns.z)
    elif ns.mode == "crossover":
        zs = [1, 137]
    elif ns.mode == "verify":
        zs = list(VERIFY_Z)
    elif ns.mode == "table":
        zs = list(TABLE_Z)
    else:
        raise ValueError("give --z")
    if ns.mode == "crossover" and len(zs) == 1:
        raise ValueError("crossover mode needs a charge range")
    Fraction(ns.mu)
    Decimal(ns.alpha_inverse)
    return RunConfig(
        alpha_inverse=ns.alpha_inverse,
        precision=PrecisionPolicy.parse(ns.precision),
        output_format=ns.output_format,
        states=states,
        z_values=zs,
        mode=ns.mode,
        units=ns.units,
        jobs=max(1, ns.jobs),
        max_nprime=ns.max_nprime,
    )


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        config = config_from_args(ns)
        for label, mu in config.states:
            parse_state_label(label, Fraction(mu))
    except (ValueError, ArithmeticError) as exc:
        parser.error(str(exc))

    def warn(msg):
        print(msg, file=sys.stderr)

    runner = MODES[config.mode]
    if ns.out == "-":
        return runner(config, sys.stdout, warn)
    with open(ns.out, "w", encoding="utf-8", newline="") as fh:
        return runner(config, fh, warn)


if __name__ == "__main__":
    sys.exit(main())
