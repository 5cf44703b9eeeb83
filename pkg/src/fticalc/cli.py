"""Command-line front door: JSON in, JSON report out.

Every run prints one report object with ``metadata`` (command, scheme, seed,
tolerances, cap), ``result`` and ``residuals``; errors produce an ``error``
field instead of ``result``. Floats are serialized with 17 significant
digits and keys are sorted, so identical requests give byte-identical
reports. Exit codes: 0 success, 1 input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .calculus import (
    BoundProfile,
    CompatibleFunction,
    b_transform_function,
)
from .canon import PolynomialEnumeration, are_equivalent, canonicalize
from .errors import (
    CanonicalizationExhausted,
    FticalcError,
    IndexOutOfRange,
    NumericalSplitFailure,
)
from .linalg import ToleranceConfig, operator_norm
from .operators import (
    DEFAULT_DIMENSION_CAP,
    apply,
    assemble_block_tuple,
    from_block_commuting,
    from_tuple,
    materialize,
    operator_from_json,
    operator_to_json,
)
from .spectra import (
    degree_in,
    everything,
    kernel_transport,
    norm_ball,
    nothing,
    principal_spectrum,
    spectral_measure,
    spectrum_membership,
    trace_window,
)
from .structure import commutant_basis, decompose
from .tower import (
    MatrixTuple,
    matrix_to_json,
    tuple_from_json,
    tuple_to_json,
    _require_keys,
)

_NUMERICAL_FAILURES = (CanonicalizationExhausted, NumericalSplitFailure)


# ---------------------------------------------------------------------------
# Deterministic JSON writer: sorted keys, floats with 17 significant digits.

def _format_float(x: float) -> str:
    if x != x:
        return '"nan"'
    if x == float("inf"):
        return '"inf"'
    if x == float("-inf"):
        return '"-inf"'
    return f"{x:.17g}"


def dumps(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dumps(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(inner + s for s in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{json.dumps(str(k))}: {dumps(obj[k], indent + 1)}" for k in sorted(obj)
        ]
        return "{\n" + ",\n".join(inner + s for s in items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# Function expression DSL: *-polynomials over x1..xl plus named builtins.

class _Tokenizer:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take_number(self) -> complex:
        start = self.pos
        seen_digit = False
        while self.pos < len(self.text) and (
            self.text[self.pos].isdigit() or self.text[self.pos] == "."
        ):
            seen_digit = True
            self.pos += 1
        if not seen_digit:
            raise ValueError(f"expected a number at position {start}")
        value = float(self.text[start : self.pos])
        if self.pos < len(self.text) and self.text[self.pos] in "ij":
            self.pos += 1
            return complex(0.0, value)
        return complex(value, 0.0)

    def take_name(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        return self.text[start : self.pos]

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise ValueError(f"expected {ch!r} at position {self.pos} in function expression")
        self.pos += 1


def _parse_expr(tk: _Tokenizer):
    node = _parse_term(tk)
    while tk.peek() in ("+", "-"):
        op = tk.peek()
        tk.pos += 1
        rhs = _parse_term(tk)
        node = ("add" if op == "+" else "sub", node, rhs)
    return node


def _parse_term(tk: _Tokenizer):
    node = _parse_factor(tk)
    while tk.peek() == "*":
        tk.pos += 1
        node = ("mul", node, _parse_factor(tk))
    return node


def _parse_factor(tk: _Tokenizer):
    if tk.peek() == "-":
        tk.pos += 1
        return ("neg", _parse_factor(tk))
    node = _parse_atom(tk)
    if tk.peek() == "^":
        tk.pos += 1
        power = tk.take_number()
        if power.imag or power.real != int(power.real) or power.real < 0:
            raise ValueError("powers must be nonnegative integers")
        node = ("pow", node, int(power.real))
    return node


def _parse_atom(tk: _Tokenizer):
    ch = tk.peek()
    if ch == "(":
        tk.pos += 1
        node = _parse_expr(tk)
        tk.expect(")")
        return node
    if ch.isdigit() or ch == ".":
        return ("num", tk.take_number())
    name = tk.take_name()
    if not name:
        raise ValueError(f"unexpected character {ch!r} in function expression")
    if name == "I":
        return ("num", complex(1.0))
    if name in ("adj", "abs", "re", "im"):
        tk.expect("(")
        inner = _parse_expr(tk)
        tk.expect(")")
        return (name, inner)
    if name == "indicator":
        tk.expect("(")
        key = tk.take_name()
        if key != "degree":
            raise ValueError("indicator takes the form indicator(degree=N)")
        tk.expect("=")
        degree = tk.take_number()
        tk.expect(")")
        return ("ind", int(degree.real))
    if name.startswith("x") and name[1:].isdigit():
        return ("var", int(name[1:]))
    raise ValueError(f"unknown name {name!r} in function expression")


def _ast_max_var(node) -> int:
    kind = node[0]
    if kind == "var":
        return node[1]
    if kind in ("num", "ind"):
        return 0
    if kind in ("neg", "adj", "abs", "re", "im"):
        return _ast_max_var(node[1])
    if kind == "pow":
        return _ast_max_var(node[1])
    return max(_ast_max_var(node[1]), _ast_max_var(node[2]))


def _ast_eval(node, rep: MatrixTuple) -> np.ndarray:
    from .linalg import matrix_abs

    n = rep.degree
    kind = node[0]
    if kind == "num":
        return node[1] * np.eye(n, dtype=np.complex128)
    if kind == "var":
        return rep.matrices[node[1] - 1]
    if kind == "ind":
        if n == node[1]:
            return np.eye(n, dtype=np.complex128)
        return np.zeros((n, n), dtype=np.complex128)
    if kind == "neg":
        return -_ast_eval(node[1], rep)
    if kind == "adj":
        return _ast_eval(node[1], rep).conj().T
    if kind == "abs":
        return matrix_abs(_ast_eval(node[1], rep))
    if kind == "re":
        v = _ast_eval(node[1], rep)
        return 0.5 * (v + v.conj().T)
    if kind == "im":
        v = _ast_eval(node[1], rep)
        return -0.5j * (v - v.conj().T)
    if kind == "pow":
        v = _ast_eval(node[1], rep)
        return np.linalg.matrix_power(v, node[2])
    a = _ast_eval(node[1], rep)
    b = _ast_eval(node[2], rep)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a @ b
    raise ValueError(f"unknown node {kind!r}")


def _ast_bound(node, r: float) -> float:
    kind = node[0]
    if kind == "num":
        return abs(node[1])
    if kind == "var":
        return r
    if kind == "ind":
        return 1.0
    if kind in ("neg", "adj", "abs", "re", "im"):
        return _ast_bound(node[1], r)
    if kind == "pow":
        return _ast_bound(node[1], r) ** node[2]
    a = _ast_bound(node[1], r)
    b = _ast_bound(node[2], r)
    return a * b if kind == "mul" else a + b


def parse_function(
    expr: str, ell: int, enumeration: PolynomialEnumeration
) -> CompatibleFunction:
    """Compile a DSL expression into a compatible function.

    Grammar: sums/differences of products of atoms; atoms are x1..xl,
    scalars (suffix i or j for imaginary), I, adj(e), abs(e), re(e), im(e),
    indicator(degree=n), parenthesized expressions and ^k powers. The bare
    name ``b_transform`` denotes the tuple-valued contraction.
    """
    text = expr.strip()
    if text == "b_transform":
        return b_transform_function(ell, enumeration)
    tk = _Tokenizer(text)
    node = _parse_expr(tk)
    if tk.peek():
        raise ValueError(f"trailing input at position {tk.pos} in function expression")
    top = _ast_max_var(node)
    if top > ell:
        raise IndexOutOfRange(f"expression uses x{top} but the input length is {ell}")
    return CompatibleFunction(
        ell=ell,
        ell_out=1,
        enumeration=enumeration,
        kernel_map=lambda cf: MatrixTuple((_ast_eval(node, cf.rep),)),
        bound_profile=BoundProfile.locally_bounded(lambda r: _ast_bound(node, r)),
        name=text,
    )


def parse_set(preset: str, enumeration: PolynomialEnumeration, tol: ToleranceConfig | None = None):
    """Set presets: all, none, degree=1,2, traceK=lo:hi or ball=path:radius.

    The ball preset canonicalizes the tuple in the referenced file under the
    active scheme and selects classes within the radius of its
    representative.
    """
    text = preset.strip()
    if text == "all":
        return everything(enumeration)
    if text == "none":
        return nothing(enumeration)
    if text.startswith("degree="):
        degrees = [int(v) for v in text[len("degree=") :].split(",")]
        return degree_in(degrees, enumeration)
    if text.startswith("ball="):
        path, _, radius = text[len("ball=") :].rpartition(":")
        if not path:
            raise ValueError("ball preset takes the form ball=path:radius")
        center = canonicalize(_load_tuple(path), enumeration, tol or ToleranceConfig())
        return norm_ball(center, float(radius), enumeration)
    if text.startswith("trace"):
        head, _, window = text.partition("=")
        k = int(head[len("trace") :])
        lo, _, hi = window.partition(":")
        return trace_window(k, float(lo), float(hi), enumeration)
    raise ValueError(f"unknown set preset {preset!r}")


# ---------------------------------------------------------------------------
# Input loading.

def _load_json(path_or_inline: str):
    text = path_or_inline
    if not text.lstrip().startswith("{"):
        with open(path_or_inline, "r", encoding="utf-8") as fh:
            text = fh.read()
    return json.loads(text)


def _load_tuple(source: str) -> MatrixTuple:
    return tuple_from_json(_load_json(source))


def _load_operator(source: str, tol: ToleranceConfig, enumeration: PolynomialEnumeration):
    """Operator JSON loads as-is; tuple JSON is modeled under the request scheme."""
    obj = _load_json(source)
    if isinstance(obj, dict) and "sectors" in obj:
        return operator_from_json(obj, tol)
    return from_tuple(tuple_from_json(obj), enumeration, tol)


# ---------------------------------------------------------------------------
# Commands.

def _cmd_inspect(args, tol, enumeration):
    obj = _load_json(args.input[0])
    if isinstance(obj, dict) and "sectors" in obj:
        t = operator_from_json(obj, tol)
        return {
            "kind": "operator",
            "l": t.ell,
            "total_dimension": t.total_dimension,
            "norm": t.norm(),
            "sectors": [
                {"degree": s.degree, "weight": s.weight, "index": s.canon.index}
                for s in t.sectors
            ],
        }, {}
    x = tuple_from_json(obj)
    basis = commutant_basis(x, tol)
    return {
        "kind": "tuple",
        "l": x.length,
        "n": x.degree,
        "norm": x.norm(),
        "irreducible": len(basis) == 1,
        "commutant_dimension": len(basis),
    }, {}


def _cmd_decompose(args, tol, enumeration):
    x = _load_tuple(args.input[0])
    dec = decompose(x, tol, enumeration)
    result = {
        "blocks": [tuple_to_json(b) for b in dec.blocks],
        "block_degrees": [b.degree for b in dec.blocks],
        "count": len(dec.blocks),
        "irreducible": len(dec.blocks) == 1,
        "unitary": matrix_to_json(dec.unitary),
    }
    return result, {"reassembly": dec.residual(x, tol)}


def _cmd_canon(args, tol, enumeration):
    x = _load_tuple(args.input[0])
    cf = canonicalize(x, enumeration, tol)
    from .tower import unitary_action

    rebuilt = unitary_action(cf.witness, x, tol)
    return (
        {
            "rep": tuple_to_json(cf.rep),
            "witness": matrix_to_json(cf.witness),
            "index": cf.index,
        },
        {"witness_reassembly": rebuilt.distance(cf.rep)},
    )


def _cmd_equiv(args, tol, enumeration):
    if len(args.input) != 2:
        raise ValueError("equiv needs exactly two --input values")
    x = _load_tuple(args.input[0])
    y = _load_tuple(args.input[1])
    return {"equivalent": are_equivalent(x, y, enumeration, tol)}, {}


def _cmd_apply(args, tol, enumeration):
    if not args.function:
        raise ValueError("apply needs --function")
    t = _load_operator(args.input[0], tol, enumeration)
    f = parse_function(args.function, t.ell, PolynomialEnumeration.from_label(t.scheme))
    value = apply(f, t, tol)
    residuals = {}
    if value.total_dimension <= args.cap:
        residuals["materialized_norm"] = materialize(value, args.cap).norm()
        residuals["sector_max_norm"] = value.norm()
        residuals["norm_gap"] = abs(
            residuals["materialized_norm"] - residuals["sector_max_norm"]
        )
    return {"operator": operator_to_json(value), "function": args.function}, residuals


def _cmd_spectrum(args, tol, enumeration):
    t = _load_operator(args.input[0], tol, enumeration)
    spectrum = principal_spectrum(t, tol)
    result = {
        "classes": [
            {
                "degree": cf.degree,
                "weight": w,
                "index": cf.index,
                "rep": tuple_to_json(cf.rep),
            }
            for cf, w in spectrum
        ]
    }
    residuals = {"weight_sum_defect": abs(sum(w for _, w in spectrum) - 1.0)}
    if len(args.input) > 1:
        probe = _load_tuple(args.input[1])
        cert = spectrum_membership(t, probe, args.eps, tol)
        result["membership"] = {
            "member": cert.member,
            "epsilon": args.eps,
            "class_index": cert.class_index,
            "conservative": cert.conservative,
        }
        residuals["distance_upper"] = cert.upper_bound
        residuals["distance_lower"] = cert.lower_bound
    return result, residuals


def _cmd_measure(args, tol, enumeration):
    t = _load_operator(args.input[0], tol, enumeration)
    b = parse_set(args.set, PolynomialEnumeration.from_label(t.scheme), tol)
    e = spectral_measure(t, b, tol)
    m = materialize(e, args.cap).matrices[0]
    return (
        {
            "projection": operator_to_json(e),
            "rank": int(round(float(np.trace(m).real))),
            "set": args.set,
        },
        {
            "idempotency": float(operator_norm(m @ m - m)),
            "selfadjointness": float(operator_norm(m - m.conj().T)),
        },
    )


def _cmd_from_blocks(args, tol, enumeration):
    obj = _load_json(args.input[0])
    _require_keys(obj, {"l", "N", "d", "blocks"}, "block system")
    ell, big_n, d = int(obj["l"]), int(obj["N"]), int(obj["d"])
    blocks = []
    for p, rows in enumerate(obj["blocks"]):
        if len(rows) != big_n or any(len(r) != big_n for r in rows):
            raise ValueError(f"coordinate {p + 1} is not an {big_n} x {big_n} block array")
        from .tower import matrix_from_json

        block = np.zeros((big_n, big_n, d, d), dtype=np.complex128)
        for j in range(big_n):
            for k in range(big_n):
                block[j, k] = matrix_from_json(rows[j][k])
        blocks.append(block)
    if len(blocks) != ell:
        raise ValueError(f"expected {ell} coordinates, got {len(blocks)}")
    t = from_block_commuting(blocks, enumeration, tol)
    raw = assemble_block_tuple(blocks)
    residuals = {}
    if t.total_dimension <= args.cap:
        residuals["assembly"] = materialize(t, args.cap).distance(raw)
    return {"operator": operator_to_json(t)}, residuals


def _cmd_transport(args, tol, enumeration):
    t = _load_operator(args.input[0], tol, enumeration)
    source = PolynomialEnumeration.from_label(t.scheme)
    target = PolynomialEnumeration(seed=args.seed2, scheme_id=args.scheme2 or source.scheme_id)
    if target.label == source.label:
        raise ValueError("transport needs a target scheme different from the source")
    _, report = kernel_transport(source, target, t, tol)
    return (
        {
            "source": source.label,
            "target": target.label,
            "atoms": report.atom_count,
            "measure_consistent": report.measure_consistent,
        },
        {
            "atom_transport": report.atom_residual,
            "module_conjugacy": report.module_residual,
        },
    )


def _cmd_selftest(args, tol, enumeration):
    from .acceptance import run_acceptance

    results = run_acceptance(full=args.full, tol=tol)
    all_passed = all(r.passed for r in results)
    result = {
        "mode": "full" if args.full else "quick",
        "passed": sum(1 for r in results if r.passed),
        "failed": sum(1 for r in results if not r.passed),
        "criteria": [
            {
                "number": r.number,
                "name": r.name,
                "passed": r.passed,
                "checks": r.checks,
                "failures": r.failures,
                "max_residual": r.max_residual,
                "notes": r.notes,
            }
            for r in results
        ],
    }
    residuals = {
        "max_residual": max((r.max_residual for r in results), default=0.0)
    }
    return result, residuals, (0 if all_passed else 2)


_COMMANDS = {
    "inspect": _cmd_inspect,
    "decompose": _cmd_decompose,
    "canon": _cmd_canon,
    "equiv": _cmd_equiv,
    "apply": _cmd_apply,
    "spectrum": _cmd_spectrum,
    "measure": _cmd_measure,
    "from-blocks": _cmd_from_blocks,
    "transport": _cmd_transport,
    "selftest": _cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fticalc",
        description="Canonical forms, compatible functions and spectral measures "
        "for tuples of complex matrices.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument(
        "--input",
        action="append",
        default=[],
        help="input file path or inline JSON (repeatable)",
    )
    parser.add_argument("--function", default=None, help="function DSL expression")
    parser.add_argument("--set", default="all", help="set preset for measure")
    parser.add_argument("--seed", type=int, default=0, help="enumeration seed")
    parser.add_argument("--scheme", default="words-v1", help="enumeration scheme id")
    parser.add_argument("--seed2", type=int, default=1, help="transport target seed")
    parser.add_argument("--scheme2", default=None, help="transport target scheme id")
    parser.add_argument("--eps", type=float, default=1e-6, help="membership tolerance")
    parser.add_argument("--tol-rank", type=float, default=1e-9)
    parser.add_argument("--tol-gap", type=float, default=1e-6)
    parser.add_argument("--tol-match", type=float, default=1e-8)
    parser.add_argument(
        "--json", action="store_true", default=True, help="JSON output (the only format)"
    )
    parser.add_argument(
        "--cap", type=int, default=DEFAULT_DIMENSION_CAP, help="materialization dimension cap"
    )
    parser.add_argument("--full", action="store_true", help="selftest: run full acceptance counts")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    tol = ToleranceConfig(
        rank_tol=args.tol_rank, gap_tol=args.tol_gap, match_tol=args.tol_match
    )
    enumeration = PolynomialEnumeration(seed=args.seed, scheme_id=args.scheme)
    metadata = {
        "command": args.command,
        "package": "fticalc",
        "version": __version__,
        "scheme": enumeration.label,
        "seed": args.seed,
        "cap": args.cap,
        "tolerances": {
            "rank_tol": tol.rank_tol,
            "gap_tol": tol.gap_tol,
            "match_tol": tol.match_tol,
            "eig_sweep_tol": tol.eig_sweep_tol,
        },
    }
    handler = _COMMANDS[args.command]
    try:
        if args.command != "selftest" and not args.input:
            raise ValueError(f"{args.command} needs at least one --input")
        out = handler(args, tol, enumeration)
        if len(out) == 3:
            result, residuals, code = out
        else:
            result, residuals = out
            code = 0
        report = {"metadata": metadata, "result": result, "residuals": residuals}
        print(dumps(report))
        return code
    except _NUMERICAL_FAILURES as exc:
        print(dumps({"metadata": metadata, "error": _error_obj(exc)}))
        return 2
    except (FticalcError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(dumps({"metadata": metadata, "error": _error_obj(exc)}))
        return 1


def _error_obj(exc: Exception) -> dict:
    return {"type": type(exc).__name__, "message": str(exc)}


if __name__ == "__main__":
    sys.exit(main())
