"""``hypocalc`` command line: config-file driven runs of each pipeline stage.

Every subcommand reads one TOML (or JSON) problem file, validates it against
``SCHEMA`` and prints a JSON report.  The payload is a pure function of the
config and the seed; wall-clock timings go to stderr so reports can be diffed.

Exit codes: 0 success, 2 invalid config, 3 numerically inconclusive.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np

from . import bchflow, catalog, filtration, hncone, osculating, rockland, symbols
from .polyfield import ParseError, parse_field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("hypocalc")

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 2, 3
COMMANDS = ("filtration", "osculating", "cone", "symbol", "rockland", "bch")


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


# key -> (type check, default); which top-level keys are required depends on the command
_num = (int, float)

SCHEMA = {
    "dim": (int, None),
    "depth": (int, None),
    "generators": (list, None),
    "full_top": (bool, None),
    "points": (list, None),
    "seed": (int, 0),
    "jet_order": (int, None),
    "threshold": (_num, 1e-10),
    "cone": {
        "pairing": (str, "basis"),
        "budget": (int, 1024),
        "t_max": (_num, 1.0),
        "x_radius": (_num, 1.0),
        "relations": (str, None),
        "candidates": (list, []),
        "membership_budget": (int, hncone.DEFAULT_STARTS),
        "membership_x_radius": (_num, 0.1),
        "invariance": (int, 0),
    },
    "symbol": {
        "letters": (list, None),
        "operators": (list, []),
        "order": (int, None),
        "covectors": (list, []),
        "functionals": (list, []),
        "cone_samples": (int, 0),
    },
    "rockland": {
        "operators": (list, []),
        "q": (int, 1),
        "eigenvalues": (int, 5),
        "M": (int, 64),
        "ladder": (list, list(rockland.DEFAULT_LADDER)),
        "threshold": (_num, rockland.DEFAULT_TOL),
        "tol": (_num, rockland.DEFAULT_TOL),
        "criterion": {
            "k": (int, 1),
            "n": (int, 1),
            "lambdas": (list, []),
            "M": (int, 128),
            "betas": (list, [1.0, -1.0, 2.0, 0.5]),
        },
    },
    "bch": {
        "suite": (bool, True),
        "orders": (list, [1, 2, 3]),
        "t_exponents": (list, [3, 10]),
        "pairs": (list, []),
        "phi_instances": (int, 0),
        "phi_scale": (_num, 0.3),
    },
}

NEEDS_GENERATORS = {"filtration", "osculating", "cone", "symbol"}


def _type_name(t) -> str:
    return "number" if t is _num else t.__name__


def _validate(raw: dict, schema: dict, prefix: str, problems: list) -> dict:
    out = {}
    for key in raw:
        if key not in schema:
            problems.append(f"{prefix}{key}: unknown key")
    for key, spec in schema.items():
        path = f"{prefix}{key}"
        if isinstance(spec, dict):
            sub = raw.get(key, {})
            if not isinstance(sub, dict):
                problems.append(f"{path}: expected a table")
                sub = {}
            out[key] = _validate(sub, spec, path + ".", problems)
            continue
        typ, default = spec
        if key not in raw:
            out[key] = default
            continue
        val = raw[key]
        if isinstance(val, bool) and typ is not bool or not isinstance(val, typ):
            problems.append(f"{path}: expected {_type_name(typ)}, got {type(val).__name__}")
        out[key] = val
    return out


def _check_generators(cfg: dict, problems: list) -> None:
    gens = cfg["generators"]
    if gens is None:
        return
    if not gens:
        problems.append("generators: must list at least one generator")
        return
    for i, g in enumerate(gens):
        path = f"generators[{i}]"
        if not isinstance(g, dict):
            problems.append(f"{path}: expected a table with 'field' and 'weight'")
            continue
        for key in g:
            if key not in ("field", "weight"):
                problems.append(f"{path}.{key}: unknown key")
        if not isinstance(g.get("field"), str):
            problems.append(f"{path}.field: missing or not a string")
        w = g.get("weight")
        if not isinstance(w, int) or isinstance(w, bool) or w < 1:
            problems.append(f"{path}.weight: must be a positive integer")
        if isinstance(g.get("field"), str) and isinstance(cfg["dim"], int):
            try:
                parse_field(g["field"], cfg["dim"])
            except ParseError as exc:
                problems.append(f"{path}.field: {exc}")


def load_config(path: str | Path, command: str | None = None) -> dict:
    """Parse and validate a problem file; raises :class:`ConfigError` listing every offending key."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError([f"{path.name}: cannot parse ({exc})"]) from exc
    return validate_config(raw, command)


def validate_config(raw: dict, command: str | None = None) -> dict:
    problems: list[str] = []
    cfg = _validate(raw, SCHEMA, "", problems)
    flat = command == "cone" and cfg["cone"]["pairing"] == "flat"
    if command in NEEDS_GENERATORS and not flat:
        needed = ("dim", "depth", "generators")
    elif cfg["generators"] is not None:
        needed = ("dim", "depth")
    else:
        needed = ("dim",) if flat else ()
    for key in needed:
        if cfg[key] is None:
            problems.append(f"{key}: missing required key")
    _check_generators(cfg, problems)
    if cfg["points"] is None and isinstance(cfg["dim"], int):
        cfg["points"] = [[0] * cfg["dim"]]
    if isinstance(cfg["points"], list) and isinstance(cfg["dim"], int):
        for i, pt in enumerate(cfg["points"]):
            if not isinstance(pt, list) or len(pt) != cfg["dim"]:
                problems.append(f"points[{i}]: expected {cfg['dim']} coordinates")
    if problems:
        raise ConfigError(problems)
    return cfg


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()


def _generators(cfg: dict) -> filtration.WeightedGenerators:
    items = [(g["field"], g["weight"]) for g in cfg["generators"]]
    return filtration.WeightedGenerators.parse(cfg["dim"], items, cfg["depth"], cfg["full_top"])


def _point(p) -> tuple:
    """Integers and ``"p/q"`` strings stay exact; floats stay floats."""
    return tuple(Fraction(v) if isinstance(v, (int, str)) else v for v in p)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HYPOCALC_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    if _threads() == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(fn, items))  # map keeps input order


def _str(v) -> str:
    return str(v)


# -- commands -------------------------------------------------------------------------------


def cmd_filtration(cfg: dict) -> tuple[dict, dict, bool]:
    gen = _generators(cfg)
    filt = filtration.generate_filtration(gen)
    table = [{"word": w.label(), "weight": w.weight, "field": str(w.field)} for w in filt.words]

    def per_point(p):
        p = _point(p)
        rep = filtration.fiber_dims(gen, p, cfg["jet_order"], cfg["threshold"], filt)
        h = filtration.check_hormander(gen, p, filt, cfg["threshold"])
        return {"point": [_str(v) for v in p], "dims": list(rep.dims), "stable": rep.stable,
                "jet_order": rep.jet_order, "hormander": h.holds, "by_convention": h.by_convention,
                "witness": [w.label() for w in h.witness]}

    points = _pmap(per_point, cfg["points"])
    inconclusive = any(not p["stable"] for p in points)
    return {"brackets": table, "points": points}, {}, inconclusive


def cmd_osculating(cfg: dict) -> tuple[dict, dict, bool]:
    gen = _generators(cfg)

    def per_point(p):
        p = _point(p)
        g, basis = osculating.osculating_with_basis(gen, p, cfg["jet_order"])
        d = g.to_dict()
        d.update({"point": [_str(v) for v in p], "type": g.classify(), "basis": [str(f) for f in basis.fields],
                  "stable": basis.stable, "jacobi_ok": not g.jacobi_defect()})
        return d

    points = _pmap(per_point, cfg["points"])
    return {"points": points}, {}, any(not p["stable"] for p in points)


def _pairing(cfg: dict, gen, p):
    if cfg["cone"]["pairing"] == "flat":
        return catalog.flat_pairing(), None
    if cfg["cone"]["pairing"] != "basis":
        raise ConfigError([f"cone.pairing: unknown pairing {cfg['cone']['pairing']!r} (use 'basis' or 'flat')"])
    g, basis = osculating.osculating_with_basis(gen, p, cfg["jet_order"])
    return hncone.PairingMap.from_basis(basis), g


def cmd_cone(cfg: dict) -> tuple[dict, dict, bool]:
    c = cfg["cone"]
    gen = _generators(cfg) if c["pairing"] == "basis" else None
    p = _point(cfg["points"][0])
    phi, g = _pairing(cfg, gen, p)
    sample = hncone.sample_cone(phi, c["budget"], t_max=c["t_max"], seed=cfg["seed"], x_radius=c["x_radius"])
    out = {"base_point": [_str(v) for v in p], "samples": len(sample), "weights": list(phi.weights)}
    if c["relations"]:
        try:
            out["relations"] = hncone.relation_residuals(c["relations"], sample.points)
        except KeyError as exc:
            raise ConfigError([f"cone.relations: {exc.args[0]}"]) from exc

    def query(xi):
        return hncone.membership(phi, xi, budget=c["membership_budget"], x_radius=c["membership_x_radius"],
                                 seed=cfg["seed"]).to_dict()

    verdicts = _pmap(query, c["candidates"])
    for v in verdicts:
        v.pop("trace", None)
    out["membership"] = verdicts
    if c["invariance"] and g is not None:
        out["invariance"] = hncone.invariance_check(phi, sample, g, count=c["invariance"], seed=cfg["seed"]).to_dict()
    inconclusive = any(v["verdict"] == "inconclusive" for v in verdicts)
    return out, {"cone_points.csv": sample.to_csv()}, inconclusive


def _complex_out(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def cmd_symbol(cfg: dict) -> tuple[dict, dict, bool]:
    s = cfg["symbol"]
    gen = _generators(cfg)
    p = _point(cfg["points"][0])
    g, basis = osculating.osculating_with_basis(gen, p, cfg["jet_order"])
    letter_items = s["letters"] if s["letters"] is not None else cfg["generators"]
    letters = tuple((parse_field(it["field"], cfg["dim"]), int(it["weight"])) for it in letter_items)
    classes = symbols.letter_classes(letters, basis)
    parts = []
    for text in s["operators"]:
        P = symbols.parse_nc(text, letters)
        parts.append((text, P, symbols.principal_part(P, p, s["order"])))
    reps = [(ell, symbols.induce_representation(g, [Fraction(v) if isinstance(v, (int, str)) else v for v in ell]))
            for ell in s["functionals"]]
    ops = []
    for text, P, PP in parts:
        order = symbols.weighted_order(P)
        ops.append({
            "operator": text,
            "weighted_order": None if order is symbols.UNDEFINED_ORDER else order,
            "principal_order": PP.order,
            "principal_part": [[str(c), [i + 1 for i in w]] for c, w in PP.monomials],
            "characters": [{"xi": [_str(v) for v in xi],
                            "value": str(symbols.symbol_character(PP, [_point([v])[0] for v in xi], classes))}
                           for xi in s["covectors"]],
            "realized": [{"functional": [_str(v) for v in ell], "q": rho.q,
                          "operator": symbols.realize_symbol(PP, rho, classes).to_text()} for ell, rho in reps],
        })
    out = {"point": [_str(v) for v in p], "algebra": g.to_dict(), "classes": [[str(c) for c in cl] for cl in classes],
           "operators": ops,
           "representations": [{"functional": [_str(v) for v in ell], "q": rho.q, "action": rho.describe()}
                               for ell, rho in reps]}
    if s["cone_samples"] and len(parts) >= 2:
        phi = hncone.PairingMap.from_basis(basis)
        sample = hncone.sample_cone(phi, s["cone_samples"], seed=cfg["seed"])
        disagreements = 0
        for x, eta, t in sample.parameters:
            xi = hncone.exact_point(phi, x, eta, t)
            vals = {str(symbols.symbol_character(PP, xi, classes)) for _, _, PP in parts}
            disagreements += len(vals) > 1
        out["cone_agreement"] = {"checked": len(sample), "disagreements": disagreements}
    return out, {}, False


def _resolve_lambda(spec, eigs: list) -> complex:
    """Numbers pass through; ``"lambdaK"`` is the K-th eigenvalue, ``"gapK"`` the midpoint of K and K+1."""
    if isinstance(spec, (int, float)):
        return complex(spec)
    if isinstance(spec, list) and len(spec) == 2:
        return complex(spec[0], spec[1])
    if isinstance(spec, str):
        if spec.startswith("lambda"):
            return complex(eigs[int(spec[6:]) - 1])
        if spec.startswith("gap"):
            k = int(spec[3:])
            return complex(eigs[k - 1] + 0.5 * (eigs[k] - eigs[k - 1]))
    raise ConfigError([f"rockland.criterion.lambdas: cannot read {spec!r}"])


def cmd_rockland(cfg: dict) -> tuple[dict, dict, bool]:
    r = cfg["rockland"]
    out, files, inconclusive = {"operators": []}, {}, False
    for idx, text in enumerate(r["operators"]):
        S = symbols.parse_operator(text, r["q"])
        entry = {"operator": S.to_text()}
        if r["q"] == 1:
            rep = rockland.spectrum_1d(S, L=r["eigenvalues"], M=r["M"], tol=r["tol"])
            entry["spectrum"] = rep.to_dict()
            files[f"spectrum_{idx + 1}.csv"] = rep.to_csv()
            inconclusive |= not rep.converged
        inj = rockland.injectivity_test(S, r["ladder"], r["threshold"])
        entry["injectivity"] = inj.to_dict()
        inconclusive |= inj.verdict == "inconclusive"
        out["operators"].append(entry)
    crit = r["criterion"]
    if crit["lambdas"]:
        base = rockland.spectrum_1d(rockland.model_operator(crit["k"], crit["n"]), L=8, M=crit["M"], tol=r["tol"])
        eigs = [float(np.real(v)) for v in base.eigenvalues]
        sweep = []
        for spec in crit["lambdas"]:
            lam = _resolve_lambda(spec, eigs)
            v = rockland.hypoellipticity_verdict(crit["k"], crit["n"], lam, M=crit["M"], tol=r["tol"],
                                                 betas=crit["betas"])
            d = v.to_dict()
            d["lambda"] = _complex_out(lam)
            d["lambda_spec"] = spec
            sweep.append(d)
        out["criterion"] = {"k": crit["k"], "n": crit["n"], "model": rockland.model_operator(crit["k"], crit["n"]).to_text(),
                            "sweep": sweep}
    return out, files, inconclusive


def cmd_bch(cfg: dict) -> tuple[dict, dict, bool]:
    b = cfg["bch"]
    lo, hi = b["t_exponents"]
    grid = [Fraction(1, 2**k) for k in range(lo, hi + 1)]
    pairs = list(bchflow.order_suite()) if b["suite"] else []
    dim = cfg["dim"]
    for i, pr in enumerate(b["pairs"]):
        pd = pr.get("dim", dim)
        pairs.append((pr.get("name", f"pair{i + 1}"), bchflow.FormalSeriesField.parse(pd, pr["x"]),
                      bchflow.FormalSeriesField.parse(pd, pr["y"]), tuple(pr["point"])))
    fits, files, inconclusive = [], {}, False
    for name, X, Y, x in pairs:
        for n in b["orders"]:
            fit = bchflow.flow_order_test(X, Y, x, n, grid)
            d = fit.to_dict()
            d["pair"] = name
            fits.append(d)
            files[f"order_{name}_n{n}.csv"] = fit.to_csv()
            inconclusive |= fit.inconclusive
    out = {"order_fits": fits, "all_passed": all(f["passed"] for f in fits)}
    if b["phi_instances"] and cfg["generators"]:
        out["phi"] = _phi_checks(cfg, b)
    return out, files, inconclusive


def _phi_checks(cfg: dict, b: dict) -> dict:
    gen = _generators(cfg)
    x = tuple(float(v) for v in cfg["points"][0])
    basis = bchflow.graded_lie_basis(gen, x)
    g = basis.algebra
    rng = np.random.default_rng(cfg["seed"])
    worst = {"group_law": 0.0, "identity": 0.0, "evaluation": 0.0, "equivariance": 0.0}
    failures = 0
    for _ in range(b["phi_instances"]):
        Y = list(rng.normal(size=g.dim) * b["phi_scale"])
        X = list(rng.normal(size=g.dim) * b["phi_scale"])
        t = float(rng.uniform(0.05, 1.0))
        lam = float(rng.uniform(0.5, 2.0))
        try:
            Z = np.array([float(v) for v in osculating.bch(g, Y, X)])
            worst["group_law"] = max(worst["group_law"], float(np.abs(np.array(bchflow.phi_map(basis, Y, X, x, 0)) - Z).max()))
            worst["identity"] = max(worst["identity"],
                                    float(np.abs(np.array(bchflow.phi_map(basis, [0] * g.dim, X, x, t)) - X).max()))
            ph = bchflow.phi_map(basis, Y, X, x, t)
            ev = bchflow.natural_flow(basis, osculating.dilate(g, t, ph), x)
            worst["evaluation"] = max(worst["evaluation"], float(np.linalg.norm(ev - bchflow.pi_map(basis, Y, X, x, t))))
            lhs = bchflow.phi_map(basis, osculating.dilate(g, lam, Y), osculating.dilate(g, lam, X), x, t / lam)
            rhs = np.array(osculating.dilate(g, lam, ph), dtype=float)
            worst["equivariance"] = max(worst["equivariance"], float(np.abs(np.array(lhs) - rhs).max()))
        except bchflow.OutsideDomain:
            failures += 1
    return {"instances": b["phi_instances"], "outside_domain": failures, "max_errors": worst,
            "basis": basis.to_dict()}


HANDLERS = {
    "filtration": cmd_filtration,
    "osculating": cmd_osculating,
    "cone": cmd_cone,
    "symbol": cmd_symbol,
    "rockland": cmd_rockland,
    "bch": cmd_bch,
}


HELP = {
    "filtration": "bracket table, Hormander check and fiber dimensions per point",
    "osculating": "structure constants of the osculating algebra per point",
    "cone": "cone sampling, relation residuals, membership queries, invariance",
    "symbol": "weighted order, principal part, characters and realized operators",
    "rockland": "spectra, injectivity verdicts and the ladder-family criterion sweep",
    "bch": "BCH flow order fits and phi-map property checks",
}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def run(command: str, cfg: dict) -> tuple[dict, dict, int]:
    """Execute one command; returns (report, side files, exit code)."""
    payload, files, inconclusive = HANDLERS[command](cfg)
    report = {"command": command, "config_digest": config_digest(cfg), "version": _version(), "results": payload}
    return report, files, EXIT_INCONCLUSIVE if inconclusive else EXIT_OK


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=True) + "\n"


def _primary_csv(command: str, files: dict, report: dict) -> str:
    if files:
        return files[sorted(files)[0]]
    rows = report["results"].get("points", [])
    lines = ["point,dims"] + [f"\"{' '.join(r['point'])}\",\"{' '.join(map(str, r.get('dims', r.get('weights', []))))}\""
                              for r in rows]
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypocalc", description="Filtered foliations, osculating groups, "
                                     "Helffer-Nourrigat cones and Rockland-type symbol checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", required=True, help="TOML or JSON problem file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="directory for report.json and CSV side files")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--quiet", action="store_true", help="suppress timings and notices on stderr")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config, args.command)
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2**64:
                raise ConfigError(["--seed: must fit in an unsigned 64-bit integer"])
            cfg["seed"] = args.seed
        start = time.perf_counter()
        report, files, code = run(args.command, cfg)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_INVALID
    except (filtration.HormanderFailure, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    elapsed = time.perf_counter() - start
    text = dumps(report) if args.format == "json" else _primary_csv(args.command, files, report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps(report), encoding="utf-8", newline="\n")
        for name, content in sorted(files.items()):
            (out / name).write_text(content, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    if not args.quiet:
        print(f"{args.command}: {elapsed:.2f} s, exit {code}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
