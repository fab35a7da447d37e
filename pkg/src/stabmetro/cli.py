"""Command-line entry point.

Examples::

    stabmetro analyze --preset fig1a
    stabmetro search --preset fig1a --alpha C,F,I,J
    stabmetro verify --preset fig1a --alpha C,F,I,J --theta 0,0.3,1.0
    stabmetro protocol2 --blocks 3,3,3 --state-preset ghz
    stabmetro noise --preset fig3a --format csv
    stabmetro construct --preset atype53

Exit codes: 0 success, 1 validation error, 2 size limit, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import dephasing as deph
from .constructors import ConstructionError, MetaGraph, build, check_rules, scaling_experiment
from .graph import Graph, GraphError, members
from .oracle import (
    MIXED_LIMIT,
    PURE_LIMIT,
    LocalModel,
    OracleError,
    OracleLimitError,
    ghz_state,
    graph_state,
    pauli_terms,
    qfi,
    saturation_report,
    theorem_check,
    zero_state,
)
from .pauli import PAULI_MATRICES, PauliError, PauliString, stabilizer_element
from .protocol1 import SearchLimitError, oracle_model, protocol1_model, qfi_upper_bound, search_optimal_alpha, structure_report
from .protocol2 import (
    SubspaceError,
    SubspaceSpec,
    SubspaceState,
    extremal_qfi,
    membership_check,
    qfi_subspace,
    subspace_generators,
    tolerance,
)

EXIT_OK, EXIT_VALIDATION, EXIT_LIMIT, EXIT_VERIFY = 0, 1, 2, 3
GAP_FLAG = 1e-7


class CliError(Exception):
    def __init__(self, msg: str, code: int = EXIT_VALIDATION):
        super().__init__(msg)
        self.code = code


def _preset_text(name: str) -> str:
    res = resources.files("stabmetro").joinpath(f"data/{name}.json")
    if not res.is_file():
        raise CliError(f"unknown preset {name!r}")
    return res.read_text()


def _load_json(args) -> dict:
    if getattr(args, "preset", None):
        text, where = _preset_text(args.preset), f"preset {args.preset}"
    elif getattr(args, "input", None):
        text, where = Path(args.input).read_text(), args.input
    else:
        raise CliError("give --input or --preset")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{where}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CliError(f"cannot parse number list {text!r}") from None


def _emit(args, payload) -> None:
    if isinstance(payload, str):
        text = payload
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _resolve_alpha(g: Graph, text: str | None) -> int | None:
    if not text:
        return None
    try:
        verts = [g.vertex(t.strip()) for t in text.split(",") if t.strip()]
    except GraphError as exc:
        raise CliError(str(exc)) from None
    mask = 0
    for v in verts:
        mask |= 1 << v
    return mask


def _named(g: Graph, model_json: dict) -> dict:
    out = dict(model_json)
    out["alpha_labels"] = [g.name(v) for v in model_json["alpha"]]
    out["hamiltonian_labels"] = [[letter, g.name(q)] for letter, q in model_json["hamiltonian"]]
    return out


# --- commands --------------------------------------------------------------


def cmd_analyze(args) -> int:
    g = Graph.from_json(_load_json(args))
    _emit(args, structure_report(g))
    return EXIT_OK


def cmd_search(args) -> int:
    g = Graph.from_json(_load_json(args))
    alpha = _resolve_alpha(g, args.alpha)
    if alpha is None:
        res = search_optimal_alpha(g, args.mode, limit=args.limit, seed=args.seed)
        alpha = res.alpha
    model = protocol1_model(g, alpha)
    out = _named(g, model.to_json())
    out["mode"] = "forced" if args.alpha else args.mode
    _emit(args, out)
    return EXIT_OK


def _model_from_json(data: dict, theta: float) -> tuple[LocalModel, PauliString]:
    probe = data.get("probe", {})
    kind = probe.get("kind")
    if kind == "ghz":
        state = ghz_state(int(probe["n"]))
    elif kind == "zero":
        state = zero_state(int(probe["n"]))
    elif kind == "graph":
        state = graph_state(Graph.from_json(probe["graph"]))
    else:
        raise CliError(f"unknown probe kind {kind!r}")
    try:
        meas = [PAULI_MATRICES[c] for c in data["measurement"]]
        terms = pauli_terms([(letter, int(q)) for letter, q in data["hamiltonian"]])
        k = PauliString.parse(data["stabilizer"])
    except (KeyError, TypeError) as exc:
        raise CliError(f"model JSON is missing or has a bad field: {exc}") from None
    return LocalModel(state, terms, meas, theta), k


def cmd_verify(args) -> int:
    data = _load_json(args)
    thetas = _floats(args.theta) if args.theta else [0.0, 0.3, 1.0]
    if "probe" in data:
        model, k = _model_from_json(data, thetas[0])
        header = {"model": data}
    else:
        g = Graph.from_json(data)
        if g.n > args.oracle_limit:
            raise CliError(f"{g.n} qubits exceeds the oracle limit of {args.oracle_limit}", EXIT_LIMIT)
        alpha = _resolve_alpha(g, args.alpha)
        if alpha is None:
            alpha = search_optimal_alpha(g, args.mode, seed=args.seed).alpha
        p1 = protocol1_model(g, alpha)
        model = oracle_model(g, alpha, thetas[0], args.oracle_limit)
        k, _ = stabilizer_element(g, alpha)
        header = _named(g, p1.to_json())
    if model.n > args.oracle_limit:
        raise CliError(f"{model.n} qubits exceeds the oracle limit of {args.oracle_limit}", EXIT_LIMIT)
    rows, flagged = saturation_report(model, thetas, GAP_FLAG)
    checks = theorem_check(model, k)
    out = {
        **header,
        "stabilizer": str(k),
        "conditions": checks.as_dict(),
        "rows": [{"theta": r.theta, "qfi": r.qfi, "cfi": r.cfi, "gap": r.gap} for r in rows],
        "flagged_thetas": flagged,
        "saturated": not flagged,
    }
    _emit(args, out)
    return EXIT_VERIFY if flagged else EXIT_OK


def _state_from_args(args, spec: SubspaceSpec) -> SubspaceState:
    d = 1 << spec.m
    if args.state:
        raw = json.loads(Path(args.state).read_text())
        re_ = np.asarray(raw["real"], dtype=float)
        im = np.asarray(raw.get("imag", np.zeros_like(re_)), dtype=float)
        c = re_ + 1j * im
        if c.ndim == 1:
            return SubspaceState.pure(spec, c)
        return SubspaceState(spec, c)
    preset = args.state_preset
    if preset == "ghz":
        return SubspaceState.basis(spec, 0)
    if preset == "uniform":
        return SubspaceState.diagonal(spec, np.ones(d))
    if preset.startswith("basis:"):
        idx = int(preset.split(":", 1)[1])
        if not 0 <= idx < d:
            raise CliError(f"basis index {idx} out of range for m={spec.m}")
        return SubspaceState.basis(spec, idx)
    raise CliError(f"unknown state preset {preset!r}")


def cmd_protocol2(args) -> int:
    if args.blocks:
        try:
            sizes = [int(s) for s in args.blocks.split(",")]
        except ValueError:
            raise CliError(f"cannot parse block sizes {args.blocks!r}") from None
        spec = SubspaceSpec.from_sizes(sizes)
    else:
        spec = SubspaceSpec.from_json(_load_json(args))
    state = _state_from_args(args, spec)
    ext = extremal_qfi(spec)
    eps = tolerance(spec)
    out = {
        "partition": spec.to_json(),
        "m": spec.m,
        "generators": [str(g) for g in subspace_generators(spec)],
        "qfi": qfi_subspace(state),
        "max": ext.max,
        "min": ext.min,
        "r_min": ext.r_min,
        "tolerance": None if math.isinf(eps) else eps,
    }
    if args.oracle:
        if spec.n > args.oracle_limit:
            raise CliError(f"{spec.n} qubits exceeds the oracle limit of {args.oracle_limit}", EXIT_LIMIT)
        dense = state.to_dense()
        out["oracle_qfi"] = qfi(dense, [(q, PAULI_MATRICES["X"]) for q in range(spec.n)])
        out["oracle_member"] = membership_check(dense, spec)
    _emit(args, out)
    return EXIT_OK


def _probe_from_json(entry: dict, budget: int, seed: int) -> deph.Probe:
    kind = entry.get("type")
    pid = entry.get("id", kind)
    if kind == "ghz":
        return deph.Probe(pid, deph.ghz_probe().evaluate)
    if kind == "ghz_closed":
        return deph.Probe(pid, deph.ghz_closed_probe().evaluate)
    if kind == "sep":
        return deph.Probe(pid, deph.separable_probe().evaluate)
    if kind == "sql":
        return deph.Probe(pid, deph.sql_probe().evaluate)
    blocks = entry.get("blocks")

    def spec_for(n: int) -> SubspaceSpec:
        if blocks == "half":
            return deph.half_split(n)
        spec = SubspaceSpec.from_sizes(blocks)
        if spec.n != n:
            raise CliError(f"probe {pid!r} has {spec.n} qubits but the sweep asks for {n}")
        return spec

    if kind == "optimized":
        return deph.optimized_probe(pid, spec_for, budget=budget, seed=seed)
    if kind == "uniform":
        return deph.subspace_probe(pid, spec_for, lambda spec, p, t: SubspaceState.diagonal(spec, np.ones(1 << spec.m)))
    raise CliError(f"unknown probe type {kind!r}")


def cmd_noise(args) -> int:
    cfg = _load_json(args) if (args.preset or args.input) else {"probes": [{"id": "ghz", "type": "ghz"}, {"id": "sep", "type": "sep"}]}
    ns = [int(v) for v in _floats(args.n)] if args.n else cfg.get("n", [9])
    ps = _floats(args.p) if args.p else cfg.get("p", [0.05])
    theta = args.theta_value if args.theta_value is not None else cfg.get("theta", deph.DEFAULT_THETA)
    for p in ps:
        if not 0 <= p <= 1:
            raise CliError(f"dephasing probability {p} outside [0, 1]")
    probes = [_probe_from_json(e, args.budget, args.seed) for e in cfg.get("probes", [])]
    rows = deph.noise_sweep(probes, ps, ns, theta)
    if args.format == "csv":
        _emit(args, deph.rows_to_csv(rows))
    else:
        _emit(args, {"rows": rows, "ghz_separable_crossover": {str(p): deph.ghz_separable_crossover(p) for p in ps if 0 < p < 0.5}})
    return EXIT_OK


def cmd_construct(args) -> int:
    data = _load_json(args)
    out: dict = {}
    if "assignment" in data:
        meta = MetaGraph.from_json(data)
        g = build(meta)
        out["graph"] = g.to_json()
        out["bound"] = qfi_upper_bound(g)
        if meta.join_mode == "full_join":
            out["rule_flags"] = check_rules(meta)
        mode = args.mode if g.n <= args.limit else "greedy"
        res = search_optimal_alpha(g, mode, limit=args.limit, seed=args.seed)
        out["search"] = {"mode": mode, "qfi": res.qfi, "alpha": members(res.alpha), "attains_bound": res.attains_bound}
    if "scaling" in data:
        sc = data["scaling"]
        res = scaling_experiment(sc["family"], sc["n_values"], sc.get("mode", "greedy"), seed=args.seed)
        out["scaling"] = res.to_json()
    if not out:
        raise CliError("preset needs 'assignment' or 'scaling'")
    _emit(args, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stabmetro", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, preset=True):
        p.add_argument("--input", help="input JSON file")
        if preset:
            p.add_argument("--preset", help="bundled preset name (e.g. fig1a, fig3a, atype53)")
        p.add_argument("--output", help="write here instead of stdout")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--oracle-limit", type=int, default=MIXED_LIMIT)
        return p

    p = common(sub.add_parser("analyze", help="twin structure and QFI bound of a graph"))
    p.set_defaults(func=cmd_analyze)

    p = common(sub.add_parser("search", help="best stabilizer protocol for a graph"))
    p.add_argument("--mode", choices=["exhaustive", "greedy"], default="exhaustive")
    p.add_argument("--alpha", help="force alpha (comma-separated vertices or labels)")
    p.add_argument("--limit", type=int, default=20, help="exhaustive size limit")
    p.set_defaults(func=cmd_search)

    p = common(sub.add_parser("verify", help="oracle check of QFI/CFI saturation"))
    p.add_argument("--mode", choices=["exhaustive", "greedy"], default="exhaustive")
    p.add_argument("--alpha")
    p.add_argument("--theta", help="comma-separated phases")
    p.set_defaults(func=cmd_verify, oracle_limit=PURE_LIMIT)

    p = common(sub.add_parser("protocol2", help="QFI of a partition subspace state"))
    p.add_argument("--blocks", help="block sizes, e.g. 3,3,3")
    p.add_argument("--state", help="coefficient JSON {real, imag}")
    p.add_argument("--state-preset", default="ghz", help="ghz, uniform or basis:<index>")
    p.add_argument("--oracle", action="store_true", help="cross-check with the dense oracle")
    p.set_defaults(func=cmd_protocol2)

    p = common(sub.add_parser("noise", help="dephasing sweeps (fig3a, fig3b presets)"))
    p.add_argument("--n", help="comma-separated sizes")
    p.add_argument("--p", help="comma-separated dephasing probabilities")
    p.add_argument("--theta", dest="theta_value", type=float)
    p.add_argument("--budget", type=int, default=4, help="optimizer restarts per cell")
    p.set_defaults(func=cmd_noise)

    p = common(sub.add_parser("construct", help="A-/B-type composites and scaling fits"))
    p.add_argument("--mode", choices=["exhaustive", "greedy"], default="exhaustive")
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(func=cmd_construct)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (SearchLimitError, OracleLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (GraphError, SubspaceError, ConstructionError, PauliError, OracleError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
