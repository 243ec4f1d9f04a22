"""Command-line front end.

    vawalk analyze Dinf:lsrw
    vawalk lclt Z:lazy --n 100,400,900 --out lclt.csv
    vawalk noise Dinf:lsrw --rho 0.2,1 --n 100,400,1600
    vawalk decouple Dinf*Z:nu --n 100,400,1600
    vawalk examples

Exit codes: 0 success, 2 unusable input, 3 memory budget refusal,
4 violated numerical invariant.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .diagram import ReducibleDiagramError, build_diagram
from .engine import DEFAULT_PRUNE, BudgetExceededError, MassInvariantError, distribution_at
from .experiments import (RunOptions, curves_to_csv, decouple_curve, factor_status, lclt_curve,
                          noise_curve)
from .fixtures import ConfigError, load_measure
from .group import GroupSpecError
from .measure import EXACT, FLOAT, MeasureError, generation_diagnostics
from .spectral import EigenvalueDegeneracyError, NotPositiveDefiniteError, covariance

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_INVARIANT = 0, 2, 3, 4

DEFAULT_N = {"lclt": "100,200,400,800", "noise": "100,200,400,800", "decouple": "100,200,400,800"}


@dataclass
class RunConfig:
    command: str
    measure: Optional[str] = None
    n_list: list[int] = field(default_factory=list)
    rho_list: list = field(default_factory=list)
    mode: Optional[str] = None
    prune: float = DEFAULT_PRUNE
    out: Optional[Path] = None
    threads: int = 1
    budget_mib: int = 2048
    dump_measure: Optional[Path] = None
    dump_diagram: Optional[Path] = None
    dump_distribution: Optional[Path] = None

    def __post_init__(self):
        if self.command in ("lclt", "noise", "decouple") and not self.n_list:
            raise ConfigError("--n: expected a nonempty list")
        if self.command == "noise" and not self.rho_list:
            raise ConfigError("--rho: expected a nonempty list")
        if self.mode not in (None, EXACT, FLOAT):
            raise ConfigError(f"--mode: expected exact or float, got {self.mode!r}")
        if self.prune < 0:
            raise ConfigError("--prune: must be nonnegative")
        if self.threads < 1:
            raise ConfigError("--threads: must be >= 1")
        if self.budget_mib < 1:
            raise ConfigError("--budget-mib: must be >= 1")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"--n: cannot parse {text!r}") from exc
    if any(v < 0 for v in vals):
        raise ConfigError("--n: times must be nonnegative")
    return vals


def _rho_list(text: str) -> list:
    out = []
    for t in (t.strip() for t in text.split(",")):
        if not t:
            continue
        try:
            r = Fraction(t)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"--rho: cannot parse {t!r}") from exc
        if not 0 <= r <= 1:
            raise ConfigError(f"--rho: {t} outside [0, 1]")
        out.append(r)
    return out


def _fmt_vec(vec) -> str:
    return "(" + ", ".join(str(c) for c in vec) + ")"


# -- commands -------------------------------------------------------------------------------


def analysis_json(mu, mode: Optional[str] = None) -> dict:
    if mode == FLOAT:
        mu = mu.to_float()
    return covariance(build_diagram(mu)).to_json()


def cmd_analyze(cfg: RunConfig) -> int:
    mu = load_measure(cfg.measure)
    if cfg.mode == FLOAT:
        mu = mu.to_float()
    elif cfg.mode == EXACT and mu.mode != EXACT:
        raise ConfigError("--mode exact: measure has float weights")
    d = build_diagram(mu)
    rep = covariance(d)
    gen = generation_diagnostics(mu)
    data = rep.to_json()
    data["generation"] = gen.status
    spec = mu.spec
    lines = [
        f"group: m={spec.m}, #F={spec.order}{', split' if spec.is_split else ', non-split'}",
        f"support: {len(mu.support)} atoms, {mu.mode} weights",
        f"zeta = {_fmt_vec(data['zeta'])}",
        "sigma = [" + "; ".join(" ".join(row) for row in data["sigma"]) + "]",
        "normalized transfer = [" + "; ".join(" ".join(row) for row in data["projector"]) + "]",
        f"hom_onto_Z = {str(rep.hom_onto_z).lower()}",
        f"period = {rep.period.period if rep.period.known else 'unknown'}"
        f" (witnesses {list(rep.period.witnesses)[:5]}, bound {rep.period.bound})",
        f"generation diagnostics: {gen.status}",
    ]
    if gen.status != "OK":
        lines.append(f"  covers quotient={gen.covers_quotient}, lattice span={gen.lattice_group_span},"
                     f" positive span={gen.lattice_positive_span} (depth {gen.depth})")
    print("\n".join(lines))
    text = json.dumps(data, indent=2, sort_keys=True)
    if cfg.out:
        cfg.out.write_text(text + "\n")
    else:
        print(text)
    if cfg.dump_measure:
        cfg.dump_measure.write_text(json.dumps(mu.to_json(), indent=2) + "\n")
    if cfg.dump_diagram:
        cfg.dump_diagram.write_text(d.to_csv())
    return EXIT_OK


def _options(cfg: RunConfig, mu) -> RunOptions:
    mode = cfg.mode or FLOAT
    if mode == EXACT and mu.mode != EXACT:
        raise ConfigError("--mode exact: measure has float weights")
    return RunOptions(prune=cfg.prune, budget_bytes=cfg.budget_mib * 2 ** 20,
                      threads=cfg.threads, mode=mode)


def _emit_curves(cfg: RunConfig, name: str, points) -> None:
    text = curves_to_csv((name, p) for p in points)
    if cfg.out:
        cfg.out.write_text(text)
    else:
        sys.stdout.write(text)


def cmd_lclt(cfg: RunConfig) -> int:
    mu = load_measure(cfg.measure)
    opts = _options(cfg, mu)
    pts = lclt_curve(mu, cfg.n_list, opts)
    _emit_curves(cfg, "lclt", pts)
    if cfg.dump_distribution:
        m = mu if opts.mode == EXACT else mu.to_float()
        dist = distribution_at(m, max(cfg.n_list), opts.mode, opts.prune)
        cfg.dump_distribution.write_text(dist.to_csv())
    return EXIT_OK


def cmd_noise(cfg: RunConfig) -> int:
    mu = load_measure(cfg.measure)
    pts = noise_curve(mu, cfg.rho_list, cfg.n_list, _options(cfg, mu))
    _emit_curves(cfg, "noise", pts)
    return EXIT_OK


def cmd_decouple(cfg: RunConfig) -> int:
    nu = load_measure(cfg.measure)
    if nu.spec.factors is None:
        raise ConfigError("decouple: measure must live on a product group such as 'Dinf*Z'")
    for st in factor_status(nu.spec):
        print(f"# factor {st['factor']}: normalized transfer rank {st['projector_rank']}, "
              f"hom_onto_Z={str(st['hom_onto_Z']).lower()}", file=sys.stderr)
    pts = decouple_curve(nu, cfg.n_list, _options(cfg, nu))
    _emit_curves(cfg, "decouple", pts)
    return EXIT_OK


EXAMPLE_FIXTURES = (
    ("dihedral, lazy", "Dinf:lsrw"),
    ("dihedral, aperiodic", "Dinf:ape"),
    ("dihedral, simple", "Dinf:srw"),
    ("triangle group", "Tri:uniform6"),
    ("integers, lazy", "Z:lazy"),
)


def noise_verdict(mu) -> str:
    """Verdict from the criterion: aperiodic, generating, no homomorphism onto Z."""
    rep = covariance(build_diagram(mu))
    gen = generation_diagnostics(mu)
    if rep.period.period != 1:
        p = rep.period.period if rep.period.known else "unknown"
        return f"criterion does not apply (period {p})"
    if gen.status != "OK":
        return "criterion inconclusive (generation diagnostics WARNING)"
    if rep.hom_onto_z:
        return "no (group maps onto Z)"
    return "yes (aperiodic, no homomorphism onto Z)"


def cmd_examples(cfg: RunConfig) -> int:
    for label, ref in EXAMPLE_FIXTURES:
        print(f"{label:<22} {ref:<14} noise sensitive: {noise_verdict(load_measure(ref))}")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "lclt": cmd_lclt, "noise": cmd_noise,
            "decouple": cmd_decouple, "examples": cmd_examples}


# -- entry point ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=(EXACT, FLOAT), default=None,
                        help="arithmetic: exact (rational) or float")
    common.add_argument("--prune", type=float, default=DEFAULT_PRUNE,
                        help="float-mode per-entry prune threshold (default %(default)g)")
    common.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker cap for independent cells")
    common.add_argument("--budget-mib", type=int, default=2048, help="memory budget in MiB")
    common.add_argument("--seed", type=int, default=None,
                        help="accepted and ignored; all computations are deterministic")

    p = argparse.ArgumentParser(prog="vawalk", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="drift, covariance, transfer, period")
    a.add_argument("measure", help="built-in '<group>:<name>' or a measure JSON file")
    a.add_argument("--dump-measure", type=Path, default=None, help="write the measure as JSON")
    a.add_argument("--dump-diagram", type=Path, default=None, help="write the diagram as CSV")

    for name, helptext in (("lclt", "TV to the local CLT Gaussian"),
                           ("noise", "TV between pi^rho_n and mu_n x mu_n"),
                           ("decouple", "TV between nu_n and the product of its marginals")):
        c = sub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("measure")
        c.add_argument("--n", default=DEFAULT_N[name], help="comma-separated times")
        if name == "noise":
            c.add_argument("--rho", default="0.2,0.5,1", help="comma-separated noise parameters")
        if name == "lclt":
            c.add_argument("--dump-distribution", type=Path, default=None,
                           help="write mu_n at the largest n as CSV")

    sub.add_parser("examples", parents=[common], help="verdicts for the built-in example walks")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        measure=getattr(ns, "measure", None),
        n_list=_int_list(ns.n) if hasattr(ns, "n") else [],
        rho_list=_rho_list(ns.rho) if hasattr(ns, "rho") else [],
        mode=ns.mode,
        prune=ns.prune,
        out=ns.out,
        threads=ns.threads,
        budget_mib=ns.budget_mib,
        dump_measure=getattr(ns, "dump_measure", None),
        dump_diagram=getattr(ns, "dump_diagram", None),
        dump_distribution=getattr(ns, "dump_distribution", None),
    )


def run(cfg: RunConfig) -> int:
    try:
        return COMMANDS[cfg.command](cfg)
    except BudgetExceededError as exc:
        print(f"vawalk: budget refusal: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (MassInvariantError, NotPositiveDefiniteError, EigenvalueDegeneracyError,
            ArithmeticError) as exc:
        print(f"vawalk: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, GroupSpecError, MeasureError, ReducibleDiagramError, ValueError) as exc:
        print(f"vawalk: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"vawalk: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
