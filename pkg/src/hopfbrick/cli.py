"""Command-line front end: verify models, run computations, emit CSV results.

Subcommands:
  verify       check every algebra axiom, tensor identity, and gate property
  run          batch-evaluate quantities from a JSON config into CSV files
  oracle       dense brute-force quantities on a small ring
  revival      exponent, revival-time bound, and optional dense confirmation
  export-spec  write a zoo model as a JSON algebra-spec document

Result CSVs carry columns (model, quantity, x, t, alpha, l, re, im) with
17-significant-digit decimals; `run` also writes a manifest with the config
hash, library version, and tolerances, sufficient to re-run the batch.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, mpo, oracle, zoo
from .algebra import (AlgebraSpecError, AxiomError, TOL_ALG, algebra_to_dict,
                      check_axioms, exponent, load_algebra)
from .representation import RepPair, Representation, Corepresentation
from .tensors import build_tensors, check_unitarity, verify_pentagon


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _load_model(name: str, tol=TOL_ALG):
    """Resolve 'zoo:<name>' or a JSON algebra-spec path into a RepPair."""
    if name.startswith("zoo:"):
        return zoo.model(name[4:])
    doc = json.loads(Path(name).read_text())
    A = load_algebra(doc, tol=tol)
    reps = doc.get("reps", {})
    coreps = doc.get("coreps", {})
    if not reps or not coreps:
        raise AlgebraSpecError("spec file must carry at least one rep and corep")
    rep_name = sorted(reps)[0]
    corep_name = sorted(coreps)[0]
    mats = np.array([[complex(float(v[0]), float(v[1])) for v in m]
                     for m in reps[rep_name]], dtype=complex)
    d_rho = int(round(np.sqrt(mats.shape[1])))
    rho = Representation(A, mats.reshape(A.dim, d_rho, d_rho), star=A.star is not None)
    centries = np.array([complex(float(v[0]), float(v[1])) for v in coreps[corep_name]])
    d_v = int(round((centries.size // A.dim) ** 0.5))
    v = Corepresentation(A, centries.reshape(d_v, d_v, A.dim),
                         unitary=A.antipode is not None and A.star is not None)
    return RepPair(A, rho, v, name=A.name or name)


def _single_site_operator(spec, d):
    """Named single-site operators: eK = |k><k|, eJK = |j><k|, or a matrix."""
    if isinstance(spec, str):
        if spec == "id":
            return np.eye(d, dtype=complex)
        if spec.startswith("e") and spec[1:].isdigit():
            idx = spec[1:]
            out = np.zeros((d, d), dtype=complex)
            if len(idx) == 1:
                out[int(idx) - 1, int(idx) - 1] = 1.0
            else:
                out[int(idx[0]) - 1, int(idx[1]) - 1] = 1.0
            return out
        raise ValueError(f"unknown operator name {spec!r}")
    arr = np.asarray(spec, dtype=complex)
    return arr.reshape(d, d)


def _site_vector(spec, d):
    named = {"+": np.ones(d) / np.sqrt(d)}
    if isinstance(spec, str):
        if spec in named:
            return named[spec]
        k = int(spec)
        out = np.zeros(d)
        out[k - 1] = 1.0
        return out
    return np.asarray(spec, dtype=complex)


def _initial_state(spec, d):
    """Product state from a site-label string like '33' or '+,+'."""
    if isinstance(spec, dict):
        return mpo.MPSState.product(_site_vector(spec["rho"], d), _site_vector(spec["v"], d))
    labels = spec.split(",") if "," in spec else list(spec)
    if len(labels) == 1:
        labels = labels * 2
    v_vec = _site_vector(labels[0], d)
    rho_vec = _site_vector(labels[1], d)
    return mpo.MPSState.product(rho_vec, v_vec)


def _grid(spec):
    if isinstance(spec, list):
        return [float(v) for v in spec]
    if isinstance(spec, dict):
        return list(np.arange(spec["start"], spec["stop"] + 1e-9, spec.get("step", 1.0)))
    return [float(spec)]


def _rand_unitary(d, rng):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(A)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# -- verify -----------------------------------------------------------------------


def cmd_verify(args) -> int:
    try:
        pair = _load_model(args.model, tol=args.tol)
    except (AlgebraSpecError, json.JSONDecodeError, OSError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except AxiomError as exc:
        print(f"axiom failure: {exc}", file=sys.stderr)
        return 1
    A = pair.algebra
    report = {"model": pair.name, "tier": A.tier, "dim": A.dim}
    ax = check_axioms(A, A.tier, tol=args.tol)
    report["axioms"] = {k: (v if isinstance(v, bool) else float(v)) for k, v in ax.items()}
    try:
        ts = build_tensors(pair, tol=args.tol)
        report["tensor_identities"] = {k: float(v) for k, v in verify_pentagon(ts).items()}
        uni = check_unitarity(ts, tol=args.tol)
        report["gate"] = {k: (v if isinstance(v, (bool, int)) else float(np.real(v)))
                          for k, v in uni.items() if not isinstance(v, np.ndarray)}
    except AxiomError as exc:
        print(f"tensor identity failure: {exc}", file=sys.stderr)
        return 1
    ok = ax["pass"]
    weak = ts.is_weak()
    for k, v in report["tensor_identities"].items():
        if k.startswith("bialgebra") and weak:
            continue
        ok = ok and v <= args.tol
    print(f"model {pair.name}: tier {A.tier}, dim {A.dim}")
    for k, v in sorted(report["axioms"].items()):
        if k != "pass":
            print(f"  axiom {k:28s} {v:.3e}")
    for k, v in sorted(report["tensor_identities"].items()):
        mark = " (not required at weak tier)" if k.startswith("bialgebra") and weak else ""
        print(f"  identity {k:25s} {v:.3e}{mark}")
    print(f"  gate unitary: {report['gate'].get('unitary')}, "
          f"dual-unitary: {report['gate'].get('dual_unitary', 'n/a')}, "
          f"rank: {report['gate'].get('rank', 'full')}")
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=1, default=float))
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


# -- run --------------------------------------------------------------------------


def _eval_point(pair, ts, state, q, point):
    kind = q["name"]
    x = point.get("x", 0.0)
    t = point.get("t", 0.0)
    alpha = point.get("alpha")
    l = point.get("l")
    d = ts.d_v
    if kind == "expectation":
        O = _single_site_operator(q["O"], d)
        val = mpo.expectation(ts, O, t, state, x=x)
    elif kind == "two_point":
        O = _single_site_operator(q["O"], d)
        O2 = _single_site_operator(q["O2"], d)
        val = mpo.two_point(ts, O, O2, int(x), int(t), state,
                            connected=q.get("connected", True))
    elif kind == "renyi":
        method = q.get("method", "auto")
        l_int = int(l)
        if method == "small" or (method == "auto" and (ts.d_rho * ts.d_v) ** (2 * l_int) <= 2 ** 20):
            val = mpo.renyi_small(ts, state, l_int, t, int(alpha))
        else:
            val = mpo.renyi_replica(ts, state, l_int, t, int(alpha))
    elif kind == "renyi_half_chain":
        val = mpo.renyi_half_chain(ts, state, t, int(alpha))
    elif kind == "st_correlator":
        A_op = _single_site_operator(q["A"], d)
        B_op = _single_site_operator(q["B"], d)
        val = mpo.st_correlator(ts, A_op, B_op, x, t)
    elif kind == "otoc":
        val = mpo.otoc(ts, point["_V"], point["_W"], x, t, warn_nonunitary=False)
    else:
        raise ValueError(f"unknown quantity {kind!r}")
    val = complex(val)
    return {"model": pair.name, "quantity": q.get("label", kind), "x": x, "t": t,
            "alpha": alpha if alpha is not None else "", "l": l if l is not None else "",
            "re": _fmt(val.real), "im": _fmt(val.imag)}


def cmd_run(args) -> int:
    config = json.loads(Path(args.config).read_text())
    out_dir = Path(args.out or config.get("output", "results"))
    out_dir.mkdir(parents=True, exist_ok=True)
    pair = _load_model(config["model"], tol=args.tol)
    ts = build_tensors(pair)
    state = _initial_state(config["initial_state"], ts.d_v)
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    rng = np.random.default_rng(seed)
    from .algebra import tier_chain
    if "bialgebra" not in tier_chain(pair.algebra.tier):
        resid = state.check_projector_invariance(pair)
        if resid > 1e-8:
            print(f"initial state is outside the solvable subspace (residual {resid:.2e})",
                  file=sys.stderr)
            return 1
    manifest = {
        "config": config,
        "config_sha256": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()).hexdigest(),
        "version": __version__,
        "seed": seed,
        "tolerances": {"tol": args.tol},
        "files": [],
    }
    for q in config["quantities"]:
        points = []
        ts_grid = _grid(q.get("t", [0.0]))
        xs = _grid(q.get("x", [0.0]))
        alphas = q.get("alpha", [None])
        ls = q.get("l", [None])
        extras = {}
        if q["name"] == "otoc":
            d = ts.d_v
            extras["_V"] = _rand_unitary(d, rng)
            extras["_W"] = _rand_unitary(d, rng)
        for t in ts_grid:
            for x in xs:
                for alpha in (alphas if isinstance(alphas, list) else [alphas]):
                    for l in (ls if isinstance(ls, list) else [ls]):
                        pt = {"x": x, "t": t}
                        if alpha is not None:
                            pt["alpha"] = alpha
                        if l is not None:
                            pt["l"] = l
                        pt.update(extras)
                        points.append(pt)
        rows = []
        errors = []

        def work(pt):
            try:
                return _eval_point(pair, ts, state, q, pt)
            except (ValueError, MemoryError) as exc:
                errors.append({"point": {k: v for k, v in pt.items()
                                         if not k.startswith("_")}, "error": str(exc)})
                return None

        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                rows = [r for r in pool.map(work, points) if r is not None]
        else:
            rows = [r for r in map(work, points) if r is not None]
        rows.sort(key=lambda r: (r["quantity"], float(r["t"]), float(r["x"]),
                                 str(r["alpha"]), str(r["l"])))
        label = q.get("label", q["name"])
        path = out_dir / f"{label}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["model", "quantity", "x", "t",
                                                    "alpha", "l", "re", "im"])
            writer.writeheader()
            writer.writerows(rows)
        manifest["files"].append(str(path.name))
        if config.get("json_mirror"):
            jpath = out_dir / f"{label}.json"
            jpath.write_text(json.dumps(rows, indent=1))
            manifest["files"].append(str(jpath.name))
        if errors:
            manifest.setdefault("errors", []).extend(errors)
            for e in errors:
                print(f"  [{label}] skipped {e['point']}: {e['error']}", file=sys.stderr)
        if args.oracle_check:
            _append_oracle_check(pair, ts, config, q, rows, int(args.oracle_check), path)
        print(f"wrote {path} ({len(rows)} rows)")
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1))
    print(f"wrote {out_dir / 'manifest.json'}")
    return 0


def _append_oracle_check(pair, ts, config, q, rows, L, path):
    """Append oracle-vs-engine deviation columns for the points that fit densely."""
    if ts.d_rho != ts.d_v:
        return
    circ = oracle.DenseCircuit.from_tensor_set(ts, L=L)
    state = _initial_state(config["initial_state"], ts.d_v)
    rho_vec = state.rho_site.reshape(-1)
    v_vec = state.v_site.reshape(-1)
    psi0 = oracle.product_state(circ, [(v_vec if k % 2 == 0 else rho_vec)
                                       for k in range(circ.n_sites)])
    out_rows = []
    for row in rows:
        dev = ""
        t = float(row["t"])
        x = float(row["x"])
        try:
            if q["name"] == "expectation" and 4 * t <= 2 * L:
                O = _single_site_operator(q["O"], ts.d_v)
                ora = oracle.oracle_expectation(circ, psi0, O, x, t)
                dev = _fmt(abs(complex(float(row["re"]), float(row["im"])) - ora))
            elif q["name"] == "renyi" and row["l"] and 2 * int(row["l"]) + 4 * t <= 2 * L:
                parity = 1 if int(round(2 * t)) % 2 == 0 else 0
                ora = oracle.oracle_renyi(circ, psi0, int(row["l"]), t,
                                          int(row["alpha"]), offset=parity)
                dev = _fmt(abs(float(row["re"]) - ora))
        except (ValueError, MemoryError):
            dev = ""
        out_rows.append({**row, "oracle_dev": dev})
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["model", "quantity", "x", "t",
                                                "alpha", "l", "re", "im", "oracle_dev"])
        writer.writeheader()
        writer.writerows(out_rows)


# -- oracle -----------------------------------------------------------------------


def cmd_oracle(args) -> int:
    pair = _load_model(args.model, tol=args.tol)
    ts = build_tensors(pair)
    circ = oracle.DenseCircuit.from_tensor_set(ts, L=args.L, amplitude_cap=args.cap)
    state = _initial_state(args.state, ts.d_v)
    rho_vec = state.rho_site.reshape(-1)
    v_vec = state.v_site.reshape(-1)
    psi0 = oracle.product_state(circ, [(v_vec if k % 2 == 0 else rho_vec)
                                       for k in range(circ.n_sites)])
    info = oracle.subspace(circ)
    print(f"ring of {circ.n_sites} sites, Hilbert dim {circ.d ** circ.n_sites}, "
          f"solvable subspace dim {info.dimension}")
    O = _single_site_operator(args.O, ts.d_v)
    for t in _grid({"start": 0.0, "stop": args.t, "step": 0.5}):
        val = oracle.oracle_expectation(circ, psi0, O, 0.0, t)
        print(f"  t={t:4.1f}  <O_0(t)> = {val.real:+.12f} {val.imag:+.3e}j")
    return 0


# -- revival ----------------------------------------------------------------------


def cmd_revival(args) -> int:
    pair = _load_model(args.model, tol=args.tol)
    eta, nu = exponent(pair.algebra, cap=args.cap)
    print(f"exponent: eta = {eta}, nu = {nu}")
    print(f"revival-time bound for L = {args.L}: eta * L = {eta * args.L}")
    if args.dense:
        ts = build_tensors(pair)
        circ = oracle.DenseCircuit.from_tensor_set(ts, L=args.L)
        t_min, phase = oracle.minimal_period(circ, eta=eta)
        divides = (eta * args.L) % t_min == 0
        print(f"dense minimal period on the solvable subspace: {t_min} "
              f"(phase {phase:+.6f}), divides eta*L: {divides}")
    return 0


# -- export-spec --------------------------------------------------------------------


def cmd_export_spec(args) -> int:
    pair = _load_model(args.model, tol=args.tol)
    doc = algebra_to_dict(pair.algebra, reps={"rho": pair.rho},
                          coreps={"v": pair.v})
    Path(args.out).write_text(json.dumps(doc, indent=1))
    print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hopfbrick",
                                     description="solvable brickwork circuits from algebra data")
    parser.add_argument("--tol", type=float, default=TOL_ALG,
                        help="axiom/identity tolerance")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads for grids")
    parser.add_argument("--cap", type=int, default=64,
                        help="search/amplitude cap where applicable")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check axioms, tensor identities, gate properties")
    p.add_argument("model", help="zoo:<name> or path to a JSON algebra spec")
    p.add_argument("--json", help="also write the full report as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="run a batch config into CSV files")
    p.add_argument("config", help="JSON run configuration")
    p.add_argument("--out", help="output directory (default from config)")
    p.add_argument("--oracle-check", metavar="L", default=None,
                   help="append oracle deviation columns using a 2L-site ring")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="dense quantities on a small ring")
    p.add_argument("model")
    p.add_argument("--L", type=int, default=3, help="unit cells")
    p.add_argument("--state", default="3", help="initial product state labels")
    p.add_argument("--O", default="e3", help="observable")
    p.add_argument("--t", type=float, default=2.0, help="max time")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("revival", help="exponent and revival times")
    p.add_argument("model")
    p.add_argument("--L", type=int, default=2, help="unit cells")
    p.add_argument("--dense", action="store_true",
                   help="confirm with the dense minimal period")
    p.set_defaults(func=cmd_revival)

    p = sub.add_parser("export-spec", help="write a model as a JSON algebra spec")
    p.add_argument("model")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_spec)

    args = parser.parse_args(argv)
    if args.cap == 64 and getattr(args, "command", "") == "oracle":
        args.cap = oracle.DEFAULT_AMPLITUDE_CAP
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
