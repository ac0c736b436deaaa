"""Command-line front end.

Subcommands: ``families`` (registry listing), ``fisher`` (metric matrices by
route), ``invariance`` (axiom residual CSV), ``clt`` (convergence table),
``tensor`` (higher-order tensor report), ``uniqueness`` (constant recovery
and candidate-functional residuals).

Every CSV row carries: family, theta (semicolon-joined), n, quantity, value,
tolerance, pass. Reals are written with 17 significant digits so repeated
runs with the same configuration and seed are byte-identical. Exit codes:
0 all checks passed, 1 usage error, 2 at least one failed check. Progress
and warnings go to standard error.

Configuration files are INI-style ``key = value`` lines (``#`` comments,
no sections); command-line flags override file values. Recognized keys:
family, params, theta, n, route, tol, seed, out, theta_lo, theta_hi, k,
cap, trials. ``family``/``params``/``theta_lo``/``theta_hi`` define the
family, the rest configure the run.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import derived, geometry, invariance, tensors
from .errors import InfoGeomError
from .expfam import ExpFamily, TangentCoord, builtin_families, fisher_information, make_family

_CONFIG_KEYS = {
    "family",
    "params",
    "theta",
    "n",
    "route",
    "tol",
    "seed",
    "out",
    "theta_lo",
    "theta_hi",
    "k",
    "cap",
    "trials",
}

_DEFAULT_N = "1,2,4,8,16"
_QUADRATURE_DEFAULT_N = "1,2,3"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise UsageError(message)


@dataclass
class Row:
    family: str
    theta: str
    n: int
    quantity: str
    value: float
    tolerance: Optional[float]
    passed: bool


@dataclass
class RunConfig:
    family: ExpFamily
    thetas: list
    n_list: list
    route: str
    tol: dict
    seed: int
    out: Optional[str]
    cap: int
    k: int
    trials: int

    def tolerance(self, key: str, default: float) -> float:
        if key in self.tol:
            return self.tol[key]
        return self.tol.get("default", default)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _theta_str(theta) -> str:
    return ";".join(_fmt(t) for t in np.asarray(theta, dtype=float).reshape(-1))


def read_config(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def _parse_params(text: Optional[str]) -> dict:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise UsageError(f"bad parameter {item!r}, expected key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        out[key] = value
    return out


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(";")])
    except ValueError as exc:
        raise UsageError(f"bad theta component in {text!r}") from exc


def _parse_thetas(text: Optional[str], family: ExpFamily) -> list:
    if text is None or text.strip() == "grid":
        return [np.array(row) for row in family.theta_grid]
    thetas = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        vec = _parse_vector(chunk)
        if vec.shape[0] != family.order:
            raise UsageError(f"theta {chunk!r} has dimension {vec.shape[0]}, family needs {family.order}")
        thetas.append(vec)
    if not thetas:
        raise UsageError("no theta values given")
    return thetas


def _parse_n_list(text: str) -> list:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad n list {text!r}") from exc
    if not values or any(v < 1 for v in values) or values != sorted(values) or len(set(values)) != len(values):
        raise UsageError("n must be a non-empty, strictly ascending list of positive integers")
    return values


def _parse_tol(text: Optional[str]) -> dict:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" in item:
            key, value = (part.strip() for part in item.split("=", 1))
        else:
            key, value = "default", item
        try:
            out[key] = float(value)
        except ValueError as exc:
            raise UsageError(f"bad tolerance {item!r}") from exc
        if out[key] <= 0.0:
            raise UsageError("tolerances must be positive")
    return out


def _pick(args, config: dict, key: str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    return config.get(key)


def _build_config(args) -> RunConfig:
    config = read_config(args.config) if args.config else {}
    name = _pick(args, config, "family")
    if not name:
        raise UsageError("--family is required (flag or config file)")
    params = _parse_params(_pick(args, config, "params"))
    lo_text = _pick(args, config, "theta_lo")
    hi_text = _pick(args, config, "theta_hi")
    kwargs = {}
    if lo_text is not None or hi_text is not None:
        if lo_text is None or hi_text is None:
            raise UsageError("theta_lo and theta_hi must be given together")
        kwargs = {"theta_lo": _parse_vector(lo_text), "theta_hi": _parse_vector(hi_text)}
    family = make_family(name, params, **kwargs)

    n_text = _pick(args, config, "n")
    if n_text is None:
        n_text = _QUADRATURE_DEFAULT_N if family.kind == "quadrature" else _DEFAULT_N
    seed_text = _pick(args, config, "seed")
    cap_text = _pick(args, config, "cap")
    k_text = _pick(args, config, "k")
    trials_text = _pick(args, config, "trials")
    try:
        seed = int(seed_text) if seed_text is not None else 42
        cap = int(cap_text) if cap_text is not None else derived.SUPPORT_CAP
        k = int(k_text) if k_text is not None else 3
        trials = int(trials_text) if trials_text is not None else 20
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    route = _pick(args, config, "route") or "A"
    if route not in ("A", "B", "C", "all"):
        raise UsageError("route must be A, B, C or all")
    return RunConfig(
        family=family,
        thetas=_parse_thetas(_pick(args, config, "theta"), family),
        n_list=_parse_n_list(n_text),
        route=route,
        tol=_parse_tol(_pick(args, config, "tol")),
        seed=seed,
        out=_pick(args, config, "out"),
        cap=cap,
        k=k,
        trials=trials,
    )


def _suite_directions(order: int):
    a = np.ones(order)
    b = np.array([1.5 if i % 2 == 0 else -0.5 for i in range(order)])
    return a, b


def _emit(rows: list, out: Optional[str]) -> None:
    rows = sorted(rows, key=lambda r: (r.family, r.theta, r.n, r.quantity))
    handle = open(out, "w", encoding="utf-8", newline="") if out else sys.stdout
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["family", "theta", "n", "quantity", "value", "tolerance", "pass"])
        for row in rows:
            writer.writerow(
                [
                    row.family,
                    row.theta,
                    row.n,
                    row.quantity,
                    _fmt(row.value),
                    "" if row.tolerance is None else _fmt(row.tolerance),
                    "true" if row.passed else "false",
                ]
            )
    finally:
        if out:
            handle.close()


def _failure_row(cfg: RunConfig, theta, n: int, quantity: str, tol: float, exc: Exception) -> Row:
    print(f"[infogeom] {cfg.family.name} theta={_theta_str(theta)} n={n} {quantity}: {exc}", file=sys.stderr)
    return Row(cfg.family.name, _theta_str(theta), n, quantity, math.nan, tol, False)


def cmd_families(args) -> list:
    del args
    print("name                   kind        d  m   theta box")
    for family in builtin_families():
        box = family.theta_domain
        bounds = f"[{', '.join(_fmt(x) for x in box.lo)}] .. [{', '.join(_fmt(x) for x in box.hi)}]"
        print(f"{family.name:<22} {family.kind:<10} {family.order:>2} {family.data_dim:>2}   {bounds}")
    return []


def cmd_fisher(cfg: RunConfig) -> list:
    rows = []
    routes = ["A", "B", "C"] if cfg.route == "all" else [cfg.route]
    for theta in cfg.thetas:
        mats = {}
        for route in routes:
            try:
                mats[route] = fisher_information(cfg.family, theta, route=route)
            except InfoGeomError as exc:
                rows.append(_failure_row(cfg, theta, 1, f"fisher_{route}", math.nan, exc))
                continue
            for i in range(cfg.family.order):
                for j in range(cfg.family.order):
                    rows.append(
                        Row(
                            cfg.family.name,
                            _theta_str(theta),
                            1,
                            f"fisher_{route}[{i},{j}]",
                            float(mats[route][i, j]),
                            None,
                            True,
                        )
                    )
        if cfg.route == "all" and {"A", "B", "C"} <= set(mats):
            gap_ab = float(np.max(np.abs(mats["A"] - mats["B"])))
            gap_ac = float(np.max(np.abs(mats["A"] - mats["C"])))
            tol_ab = cfg.tolerance("route_ab", 1e-10)
            tol_ac = cfg.tolerance("route_ac", 1e-6)
            rows.append(
                Row(cfg.family.name, _theta_str(theta), 1, "route_gap_AB", gap_ab, tol_ab, gap_ab <= tol_ab)
            )
            rows.append(
                Row(cfg.family.name, _theta_str(theta), 1, "route_gap_AC", gap_ac, tol_ac, gap_ac <= tol_ac)
            )
    return rows


def cmd_invariance(cfg: RunConfig) -> list:
    rows = []
    default_tol = 1e-9 if cfg.family.kind == "discrete" else 1e-6
    tol = cfg.tolerance("axioms", default_tol)
    affine_tol = cfg.tolerance("a3_affine", 1e-12)
    a, b = _suite_directions(cfg.family.order)
    for theta in cfg.thetas:
        u = TangentCoord(theta, a)
        v = TangentCoord(theta, b)
        for n in cfg.n_list:
            for checker, name in ((invariance.check_A1, "A1"), (invariance.check_A2, "A2")):
                try:
                    if name == "A1":
                        report = checker(cfg.family, u, v, n, tol=tol)
                    else:
                        report = checker(cfg.family, u, v, n, tol=tol, support_cap=cfg.cap)
                    rows.append(
                        Row(cfg.family.name, _theta_str(theta), n, name, report.residual, tol, report.passed)
                    )
                except InfoGeomError as exc:
                    rows.append(_failure_row(cfg, theta, n, name, tol, exc))
        try:
            report = invariance.check_A3_constancy(cfg.family, u, cfg.n_list, tol=tol, support_cap=cfg.cap)
            rows.append(
                Row(
                    cfg.family.name,
                    _theta_str(theta),
                    cfg.n_list[-1],
                    "A3-constancy",
                    report.residual,
                    tol,
                    report.passed,
                )
            )
        except InfoGeomError as exc:
            rows.append(_failure_row(cfg, theta, cfg.n_list[-1], "A3-constancy", tol, exc))
        try:
            report = invariance.check_A3_affine(
                cfg.family, u, n=cfg.n_list[0], seed=cfg.seed, tol=affine_tol, support_cap=cfg.cap
            )
            rows.append(
                Row(
                    cfg.family.name,
                    _theta_str(theta),
                    cfg.n_list[0],
                    "A3-affine",
                    report.residual,
                    affine_tol,
                    report.passed,
                )
            )
        except InfoGeomError as exc:
            rows.append(_failure_row(cfg, theta, cfg.n_list[0], "A3-affine", affine_tol, exc))
    return rows


def cmd_clt(cfg: RunConfig) -> list:
    rows = []
    ks_tol = cfg.tol.get("ks", cfg.tol.get("default"))
    for theta in cfg.thetas:
        for n in cfg.n_list:
            try:
                diag = invariance.clt_diagnostics(cfg.family, theta, n, support_cap=cfg.cap)
            except InfoGeomError as exc:
                rows.append(_failure_row(cfg, theta, n, "ks_max", ks_tol or math.nan, exc))
                continue
            passed = True if ks_tol is None else diag.ks_max <= ks_tol
            rows.append(Row(cfg.family.name, _theta_str(theta), n, "ks_max", diag.ks_max, ks_tol, passed))
            rows.append(
                Row(cfg.family.name, _theta_str(theta), n, "moment_gap", diag.moment_gap, None, True)
            )
    return rows


def cmd_tensor(cfg: RunConfig) -> list:
    rows = []
    fd_tol = cfg.tolerance("fd3", 1e-5)
    a = np.ones(cfg.family.order)
    for theta in cfg.thetas:
        value = tensors.amari_chentsov(cfg.family, theta, [a] * cfg.k)
        rows.append(
            Row(cfg.family.name, _theta_str(theta), 1, f"amari_chentsov_k{cfg.k}", value, None, True)
        )
        if cfg.k == 3:
            try:
                gap = abs(value - tensors.fd_third_derivative(cfg.family, theta, a))
                rows.append(
                    Row(cfg.family.name, _theta_str(theta), 1, "fd3_gap", gap, fd_tol, gap <= fd_tol)
                )
            except InfoGeomError as exc:
                rows.append(_failure_row(cfg, theta, 1, "fd3_gap", fd_tol, exc))
        for n in cfg.n_list:
            if n == 1:
                continue
            try:
                check = tensors.higher_scaling_check(cfg.family, theta, a, n, cfg.k, support_cap=cfg.cap)
            except InfoGeomError as exc:
                rows.append(_failure_row(cfg, theta, n, f"scaling_residual_k{cfg.k}", math.nan, exc))
                continue
            rows.append(
                Row(
                    cfg.family.name,
                    _theta_str(theta),
                    n,
                    f"scaling_residual_k{cfg.k}",
                    check.residual,
                    None,
                    True,
                )
            )
            rows.append(
                Row(
                    cfg.family.name,
                    _theta_str(theta),
                    n,
                    f"scaling_exponent_k{cfg.k}",
                    check.measured_exponent,
                    None,
                    True,
                )
            )
    return rows


def cmd_uniqueness(cfg: RunConfig) -> list:
    rows = []
    tol = cfg.tolerance("uniqueness", 1e-10)
    spread_tol = cfg.tolerance("spread", 1e-10)
    if len(cfg.n_list) < 2:
        raise UsageError("uniqueness needs at least two n values")
    n1, n2 = cfg.n_list[0], cfg.n_list[1]
    fisher_h = geometry.fisher_norm_functional()
    candidates = [
        ("fisher", fisher_h, tol),
        ("3xfisher", geometry.scaled_norm_functional(fisher_h, 3.0), tol),
        ("l1_perturbed", geometry.l1_perturbed_norm_functional(0.1), None),
    ]
    a = np.ones(cfg.family.order)
    for theta in cfg.thetas:
        u = TangentCoord(theta, a)
        for label, functional, check_tol in candidates:
            try:
                residual = invariance.uniqueness_residual(functional, cfg.family, u, n1, n2, support_cap=cfg.cap)
            except InfoGeomError as exc:
                rows.append(
                    _failure_row(cfg, theta, n2, f"uniqueness_residual[{label}]", check_tol or math.nan, exc)
                )
                continue
            passed = True if check_tol is None else residual <= check_tol
            rows.append(
                Row(
                    cfg.family.name,
                    _theta_str(theta),
                    n2,
                    f"uniqueness_residual[{label}]",
                    residual,
                    check_tol,
                    passed,
                )
            )
    fisher_field = geometry.fisher_metric_field(cfg.family)
    fields = [
        ("2.5xfisher", geometry.scaled_metric_field(fisher_field, 2.5), spread_tol),
        ("sin_perturbed", geometry.sinusoidal_fisher_field(cfg.family), None),
    ]
    theta0 = cfg.thetas[0]
    for label, metric_field, check_tol in fields:
        result = invariance.recover_constant(metric_field, cfg.family, trials=cfg.trials, seed=cfg.seed)
        rows.append(
            Row(cfg.family.name, _theta_str(theta0), 1, f"recover_c_hat[{label}]", result.c_hat, None, True)
        )
        passed = True if check_tol is None else result.spread <= check_tol
        rows.append(
            Row(
                cfg.family.name,
                _theta_str(theta0),
                1,
                f"recover_spread[{label}]",
                result.spread,
                check_tol,
                passed,
            )
        )
    return rows


def build_parser() -> _Parser:
    parser = _Parser(prog="infogeom", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        if name == "families":
            return p
        p.add_argument("--family", help="registered family name")
        p.add_argument("--params", help="family parameters, e.g. m=4")
        p.add_argument("--theta", help="theta values: 'grid' or comma-separated ;-joined vectors")
        p.add_argument("--n", help="ascending comma-separated extension sizes")
        p.add_argument("--route", help="fisher route: A, B, C or all")
        p.add_argument("--tol", help="tolerance overrides: value or key=value[,key=value...]")
        p.add_argument("--seed", help="seed for random tangent sampling")
        p.add_argument("--out", help="CSV output path (default stdout)")
        p.add_argument("--config", help="INI-style key=value configuration file")
        p.add_argument("--cap", help="convolution support cap")
        p.add_argument("--k", help="tensor order (tensor command)")
        p.add_argument("--trials", help="random tangents for constant recovery")
        p.add_argument("--theta-lo", dest="theta_lo", help="domain lower bounds, ;-joined")
        p.add_argument("--theta-hi", dest="theta_hi", help="domain upper bounds, ;-joined")
        return p

    add("families", "list the registered families")
    add("fisher", "Fisher information matrices by route")
    add("invariance", "axiom residual report (A1, A2, A3)")
    add("clt", "convergence diagnostics for the standardized push-forwards")
    add("tensor", "higher-order tensor values, derivative and scaling checks")
    add("uniqueness", "constant recovery and candidate-functional residuals")
    return parser


_COMMANDS = {
    "fisher": cmd_fisher,
    "invariance": cmd_invariance,
    "clt": cmd_clt,
    "tensor": cmd_tensor,
    "uniqueness": cmd_uniqueness,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "families":
            cmd_families(args)
            return 0
        cfg = _build_config(args)
        print(f"[infogeom] {args.command}: family={cfg.family.name} seed={cfg.seed}", file=sys.stderr)
        rows = _COMMANDS[args.command](cfg)
        _emit(rows, cfg.out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except InfoGeomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    failed = [row for row in rows if row.tolerance is not None and not row.passed]
    failed += [row for row in rows if math.isnan(row.value)]
    return 2 if failed else 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
