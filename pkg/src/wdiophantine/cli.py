"""Command-line workbench: ``wdiophantine <command> ...``.

Every command writes one report (JSON document or columnar CSV).  Exit status:
0 success, 2 precision limited, 3 scale overflow, 4 input error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import approx, dynamics, structure
from .core import TargetVector, Weight, WeightSet, norm_of_brackets, quasi_norm
from .errors import (
    ContainmentViolation,
    DecompositionError,
    DimensionMismatch,
    DomainError,
    InputError,
    InsufficientData,
    NoSolutionFound,
    PrecisionLimited,
    ScaleOverflow,
    TerminatedRational,
    WDAError,
)
from .formats import (
    RunConfig,
    dump_csv,
    dump_json,
    load_document,
    make_document,
    parse_int_matrix,
    parse_polynomial,
    parse_rational_matrix,
    parse_vector,
    parse_weight,
    parse_weight_set,
)

EXIT_OK, EXIT_PRECISION, EXIT_SCALE, EXIT_INPUT = 0, 2, 3, 4


class Result:
    def __init__(self, kind, inputs, result, columns=None, order=None, status="ok"):
        self.kind, self.inputs, self.result = kind, inputs, result
        self.columns, self.order, self.status = columns, order, status


def _target(args, cfg) -> TargetVector:
    if not args.x:
        raise InputError("--x is required")
    return TargetVector(parse_vector(args.x), cfg.precision_bits)


def _weight_set(args, cfg, d) -> WeightSet:
    src = getattr(args, "W", None) or cfg.weights_source
    if src is None:
        w = getattr(args, "w", None)
        if w is None:
            raise InputError("a weight (--w) or weight set (--W) is required")
        src = w
    W = parse_weight_set(src, d)
    if W.d != d:
        raise DimensionMismatch(f"x has dimension {d}, weights have dimension {W.d}")
    return W


def _weight(args, d) -> Weight:
    if not args.w:
        raise InputError("--w is required")
    w = parse_weight(args.w)
    if w.d != d:
        raise DimensionMismatch(f"x has dimension {d}, weight has dimension {w.d}")
    return w


# --------------------------------------------------------------------------
# commands


def cmd_norm(args, cfg):
    x = _target(args, cfg)
    w = _weight(args, x.d)
    v = quasi_norm(x, w)
    res = {"approx": v.approx}
    if args.r is not None:
        r = Fraction(args.r)
        res["r"] = r
        res["leq"] = v.leq(r)
    return Result("norm", {"x": x.describe(), "w": str(w)}, res)


def cmd_dirichlet(args, cfg):
    x = _target(args, cfg)
    w = _weight(args, x.d)
    a = approx.dirichlet_solve(x, w, args.Q)
    return Result("dirichlet", {"x": x.describe(), "w": str(w), "Q": args.Q}, {"approximant": a.as_dict(), "threshold": Fraction(1, args.Q)})


def cmd_best_seq(args, cfg):
    x = _target(args, cfg)
    w = _weight(args, x.d)
    seq = approx.best_sequence(x, w, cfg.Q_max)
    entries = [a.as_dict() for a in seq.entries]
    cols = {"q": [e["q"] for e in entries], "p": [e["p"] for e in entries], "err": [e["err"] for e in entries]}
    return Result(
        "best_sequence",
        {"x": x.describe(), "w": str(w), "Q_max": cfg.Q_max},
        {"entries": entries, "terminated": seq.terminated, "unresolved_ties": seq.unresolved_ties},
        cols,
        ["q", "p", "err"],
    )


def cmd_exponents(args, cfg):
    x = _target(args, cfg)
    w = _weight(args, x.d)
    inputs = {"x": x.describe(), "w": str(w), "Q_max": cfg.Q_max}
    seq = approx.best_sequence(x, w, cfg.Q_max)
    kw = {"window": cfg.window, "sequence": seq}
    try:
        uni = approx.uniform_exponent_estimate(x, w, cfg.Q_max, **kw)
        ordi = approx.ordinary_exponent_estimate(x, w, cfg.Q_max, **kw)
    except TerminatedRational:
        q = seq.entries[-1].q
        return Result("exponents", inputs, {"terminated_at_q": q}, {"kind": ["terminated"], "q_n": [q], "q_next": [""], "exponent": ["inf"]}, ["kind", "q_n", "q_next", "exponent"], status="terminated_rational")
    cols = {"kind": [], "q_n": [], "q_next": [], "exponent": []}
    for qa, qb, e in uni.samples:
        cols["kind"].append("uniform_gap")
        cols["q_n"].append(qa)
        cols["q_next"].append(qb)
        cols["exponent"].append(e)
    for qa, e in ordi.samples:
        cols["kind"].append("ordinary")
        cols["q_n"].append(qa)
        cols["q_next"].append("")
        cols["exponent"].append(e)
    return Result("exponents", inputs, {"uniform": uni.as_dict(), "ordinary": ordi.as_dict()}, cols, ["kind", "q_n", "q_next", "exponent"])


def cmd_singular_cert(args, cfg):
    x = _target(args, cfg)
    W = _weight_set(args, cfg, x.d)
    if args.epsilon is not None:
        rep = approx.epsilon_singular_certificate(x, W, Fraction(args.epsilon), cfg.Q_max)
    elif args.delta is not None:
        rep = approx.singular_certificate(x, W, Fraction(args.delta), cfg.Q_max)
    else:
        rep = approx.dirichlet_certificate(x, W, cfg.Q_max)
    cols = {"record": [], "Q_lo": [], "Q_hi": [], "weight_index": [], "q": [], "p": []}
    for wt in rep.witnesses:
        for k, v in (("record", "witness"), ("Q_lo", wt.Q_lo), ("Q_hi", wt.Q_hi), ("weight_index", wt.weight_index), ("q", wt.approximant.q), ("p", list(wt.approximant.p))):
            cols[k].append(v)
    for lo, hi, k in rep.failures:
        for key, v in (("record", "failure"), ("Q_lo", lo), ("Q_hi", hi), ("weight_index", k), ("q", ""), ("p", "")):
            cols[key].append(v)
    inputs = {"x": x.describe(), "W": [str(w) for w in W], "Q_max": cfg.Q_max, "delta": args.delta, "epsilon": args.epsilon}
    return Result("certificate", inputs, rep.as_dict(), cols, ["record", "Q_lo", "Q_hi", "weight_index", "q", "p"])


def cmd_flow(args, cfg):
    x = _target(args, cfg)
    W = _weight_set(args, cfg, x.d)
    inputs = {"x": x.describe(), "W": [str(w) for w in W], "norm": args.norm}
    if args.t is not None:
        rows = []
        for k, w in enumerate(W):
            sv = dynamics.shortest_vector(dynamics.FlowPoint(x, w, args.t), norm=args.norm)
            rows.append({"weight_index": k, "delta": sv.value, "q": sv.q, "p": list(sv.p)})
        cols = {"w_index": [r["weight_index"] for r in rows], "delta": [r["delta"] for r in rows], "q": [r["q"] for r in rows]}
        return Result("flow_point", {**inputs, "t": args.t}, {"values": rows}, cols, ["w_index", "delta", "q"])
    trace = dynamics.tau_hat_estimate(x, W, t_max=cfg.t_max, t_step=cfg.t_step, norm=args.norm)
    return Result("rate_trace", {**inputs, "t_max": cfg.t_max, "t_step": cfg.t_step}, trace.as_dict(), trace.columns(), ["t", "w_index", "delta", "rate"])


def cmd_correspondence(args, cfg):
    x = _target(args, cfg)
    W = _weight_set(args, cfg, x.d)
    v = dynamics.verify_sandwich(x, W, cfg.Q_max, cfg.t_max, args.slack, t_step=cfg.t_step)
    result = {"sandwich": v.as_dict()}
    if len(W) == 1 and not x.is_rational:
        result["single_weight"] = dynamics.single_weight_equality_check(x, W[0], cfg.Q_max, cfg.t_max, args.slack, t_step=cfg.t_step).as_dict()
    inputs = {"x": x.describe(), "W": [str(w) for w in W], "Q_max": cfg.Q_max, "t_max": cfg.t_max, "slack": args.slack}
    cols = {"check": [], "passed": []}
    for name, r in result.items():
        for side, ok in r["checks"].items():
            cols["check"].append(f"{name}.{side}")
            cols["passed"].append(ok)
    return Result("correspondence", inputs, result, cols, ["check", "passed"], status=v.status)


def cmd_covolume(args, cfg):
    x = _target(args, cfg)
    w = _weight(args, x.d)
    basis = dynamics.SubmoduleBasis(tuple(tuple(r) for r in parse_int_matrix(args.basis)))
    if basis.ambient != x.d + 1:
        raise DimensionMismatch(f"basis vectors must have length {x.d + 1}")
    cov = dynamics.submodule_covolume(basis, x, w, args.t)
    C = args.C if args.C is not None else dynamics.default_decomposition_constant(x.d)
    check = dynamics.covolume_decomposition_check(basis, x, w, args.t, C)
    inputs = {"x": x.describe(), "w": str(w), "t": args.t, "basis": [list(v) for v in basis.vectors]}
    return Result("covolume", inputs, {"covolume": cov, "decomposition": check.as_dict()})


def cmd_structure(args, cfg):
    if args.action == "diophantine":
        fam = structure.solve_linear_diophantine(args.a, args.b, args.c)
        inputs = {"a": args.a, "b": args.b, "c": args.c}
        return Result("diophantine", inputs, {"solution": None if fam is None else fam.as_dict()})
    if args.action == "pairs":
        x = _target(args, cfg)
        dec = structure.consecutive_pair_analysis(x, Fraction(args.delta), cfg.Q_max)
        cols = dec.columns()
        return Result("pair_decomposition", {"x": x.describe(), "delta": args.delta, "Q_max": cfg.Q_max}, dec.as_dict(), cols, list(cols))
    s1 = structure.exponent_relation_check(Fraction(args.sigma2))
    return Result("exponent_relation", {"sigma2": args.sigma2}, {"sigma1": s1})


def cmd_construct(args, cfg):
    if args.what == "hyperplane":
        if not args.w or args.head is None:
            raise InputError("construct hyperplane needs --w and --head")
        w = parse_weight(args.w)
        head = [Fraction(v) for v in parse_vector(args.head)] if args.head.strip() else []
        hp = structure.hyperplane_point(w, len(head), head, precision_bits=cfg.precision_bits)
        res = hp.as_dict()
        if args.verify:
            rep = hp.verify(cfg.Q_max)
            res["certificate"] = rep.as_dict()
        return Result("construct_hyperplane", {"w": str(w), "head": args.head}, res)
    cfv = structure.continued_fraction_vector(args.rule, precision_bits=cfg.precision_bits)
    res = {"x": cfv.x.describe(), "sigma": cfv.sigma, "sigma_hat": cfv.sigma_hat, "growth_estimate": cfv.growth_estimate(), "convergents": [list(c) for c in cfv.real.convergents(10)]}
    return Result("construct_cf", {"rule": args.rule}, res)


def cmd_probe(args, cfg):
    A = parse_rational_matrix(args.subspace_matrix)
    b = [Fraction(v) for v in parse_vector(args.subspace_offset)]
    L = structure.AffineMap.of(A, b)
    polys = [parse_polynomial(p, args.curve_params) for p in args.curve.split(";")]
    C = structure.PolynomialMap.of(polys, args.curve_params)
    W = _weight_set(args, cfg, L.d)
    rep = structure.inheritance_probe(L, C, W, cfg.Q_max, args.samples, seed=cfg.seed, window=cfg.window)
    cols = {"set": ["subspace"] * len(rep.subspace_values) + ["curve"] * len(rep.curve_values), "sigma_hat": rep.subspace_values + rep.curve_values}
    return Result("probe", {"subspace": L.describe(), "curve": args.curve}, rep.as_dict(), cols, ["set", "sigma_hat"])


def cmd_validate(args, cfg):
    """Re-check the witnesses embedded in a saved certificate report."""
    with open(args.report) as fh:
        doc = load_document(fh.read())
    ok = validate_document(doc)
    return Result("validation", {"report": args.report}, {"valid": ok}, status="ok" if ok else "invalid")


def validate_document(doc: dict) -> bool:
    """Round-trip check: parse the embedded inputs and re-verify each witness."""
    if doc.get("kind") != "certificate":
        return True
    res = doc["result"]
    prec = int(res["precision_bits"])
    x = TargetVector([c for part in res["x"] for c in parse_vector(part)], prec)
    W = WeightSet(tuple(parse_weight(w) for w in res["weights"]))
    rep = approx.CertificateReport(res["kind"], x, W, Fraction(res["threshold"]), tuple(res["Q_range"]), res["Q0"], [], [], prec)
    for wt in res["witnesses"]:
        w = W[wt["weight_index"]]
        q, p = int(wt["q"]), tuple(int(v) for v in wt["p"])
        brackets = []
        for i, pi in enumerate(p):
            lo, hi, den = x.bracket(i)
            brackets.append((q * lo - pi * den, q * hi - pi * den, den))
        err = norm_of_brackets(brackets, w, prec)
        for Q in (wt["Q_lo"], wt["Q_hi"]):
            if q > Q or not rep.threshold_ok(Q)(err):
                return False
    return True


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--precision", type=int, help="working precision in bits")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int)
    common.add_argument("--Qmax", type=_int_like)
    common.add_argument("--tmax", type=float)
    common.add_argument("--tstep", type=float)
    common.add_argument("--window", type=float)

    p = argparse.ArgumentParser(prog="wdiophantine", description="Weighted Diophantine approximation workbench.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("norm", cmd_norm, "weighted quasi-norm of x")
    sp.add_argument("--x")
    sp.add_argument("--w")
    sp.add_argument("--r", help="optional exact threshold for ||x||_w <= r")

    sp = add("dirichlet", cmd_dirichlet, "first q <= Q with ||qx-p||_w < 1/Q")
    sp.add_argument("--x")
    sp.add_argument("--w")
    sp.add_argument("--Q", type=_int_like, required=True)

    sp = add("best-seq", cmd_best_seq, "best approximation sequence")
    sp.add_argument("--x")
    sp.add_argument("--w")

    sp = add("exponents", cmd_exponents, "uniform and ordinary exponent estimates")
    sp.add_argument("--x")
    sp.add_argument("--w")

    sp = add("singular-cert", cmd_singular_cert, "delta-, epsilon- or Dirichlet certificates")
    sp.add_argument("--x")
    sp.add_argument("--W")
    sp.add_argument("--w")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--delta")
    g.add_argument("--epsilon")

    sp = add("flow", cmd_flow, "shortest vectors along the diagonal flow")
    sp.add_argument("--x")
    sp.add_argument("--W")
    sp.add_argument("--w")
    sp.add_argument("--t", type=float, help="single time; omit for a rate trace up to --tmax")
    sp.add_argument("--norm", choices=["sup", "quasi"], default="sup")

    sp = add("correspondence", cmd_correspondence, "exponent sandwich between the two sides")
    sp.add_argument("--x")
    sp.add_argument("--W")
    sp.add_argument("--w")
    sp.add_argument("--slack", type=float, default=0.1)

    sp = add("covolume", cmd_covolume, "covolume of a flowed sublattice")
    sp.add_argument("--x")
    sp.add_argument("--w")
    sp.add_argument("--basis", required=True, help="integer rows separated by ';'")
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--C", type=float)

    sp = add("structure", cmd_structure, "integer structure: diophantine | pairs | relation")
    sp.add_argument("action", choices=["diophantine", "pairs", "relation"])
    sp.add_argument("--a", type=int)
    sp.add_argument("--b", type=int)
    sp.add_argument("--c", type=int)
    sp.add_argument("--x")
    sp.add_argument("--delta", default="4/5")
    sp.add_argument("--sigma2")

    sp = add("construct", cmd_construct, "points with known exponents: hyperplane | cf")
    sp.add_argument("what", choices=["hyperplane", "cf"])
    sp.add_argument("--w")
    sp.add_argument("--head")
    sp.add_argument("--rule", default="ones")
    sp.add_argument("--verify", action="store_true")

    sp = add("probe", cmd_probe, "compare exponent samples on a subspace and a curve inside it")
    sp.add_argument("--subspace-matrix", required=True, help="rows of A separated by ';'")
    sp.add_argument("--subspace-offset", required=True)
    sp.add_argument("--curve", required=True, help="coordinate polynomials separated by ';'")
    sp.add_argument("--curve-params", type=int, default=1)
    sp.add_argument("--W")
    sp.add_argument("--w")
    sp.add_argument("--samples", type=int, default=8)

    sp = add("validate", cmd_validate, "re-verify witnesses of a saved report")
    sp.add_argument("report")
    return p


def _int_like(s: str) -> int:
    try:
        v = Fraction(s) if "e" not in s.lower() else Fraction(float(s))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if v.denominator != 1:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    return int(v)


def _config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    for flag, key in (("precision", "precision_bits"), ("Qmax", "Q_max"), ("tmax", "t_max"), ("tstep", "t_step"), ("window", "window"), ("seed", "seed"), ("format", "output_format")):
        v = getattr(args, flag, None)
        if v is not None:
            setattr(cfg, key, v)
    W = getattr(args, "W", None)
    if W is not None:
        cfg.weights_source = W
    return cfg


def _error_doc(kind, cfg, message, status):
    return make_document(kind, cfg, {}, {"error": message}, status=status)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        res = args.fn(args, cfg)
        code = EXIT_OK
    except (PrecisionLimited, NoSolutionFound) as e:
        print(f"precision limited: {e}", file=sys.stderr)
        return EXIT_PRECISION
    except ScaleOverflow as e:
        print(f"scale overflow: {e}", file=sys.stderr)
        return EXIT_SCALE
    except (InputError, DimensionMismatch, DomainError, ContainmentViolation, DecompositionError, InsufficientData) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except TerminatedRational as e:
        res = Result(args.command, {}, {"message": str(e)}, status="terminated_rational")
        code = EXIT_OK
    except (ValueError, ZeroDivisionError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except WDAError as e:  # pragma: no cover - unexpected library error
        print(f"error: {e}", file=sys.stderr)
        return 1
    if cfg.output_format == "csv":
        if res.columns is None:
            cols = {"key": list(res.result), "value": [res.result[k] for k in res.result]}
            text = dump_csv(cols, ["key", "value"])
        else:
            text = dump_csv(res.columns, res.order)
    else:
        text = dump_json(make_document(res.kind, cfg, res.inputs, res.result, res.status))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if res.kind == "validation" and res.status != "ok":
        return EXIT_INPUT
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
