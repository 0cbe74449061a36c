"""Problem files (strict JSON) and CSV output.

The schema is documented in ``docs/problem_schema.md``. Patch indices are
1-based in files and 0-based everywhere else.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .models import SIS, Competition, ModelSpec, PredatorPrey, SingleSpecies
from .netmat import DispersalNetwork, network_from_triplets

SCHEMA_VERSION = "1"

_TOP_KEYS = {"schema_version", "network", "q", "model", "karlin", "kvector", "tree_cycle",
             "analysis"}
_NETWORK_KEYS = {"n", "edges", "diag", "leak"}
_MODEL_KEYS = {
    "single": {"variant", "mu", "growth", "r", "K", "p"},
    "predprey": {"variant", "r", "K", "c", "d", "mu_u", "mu_v", "response", "half",
                 "predator_network"},
    "competition": {"variant", "p", "mu_u", "mu_v"},
    "sis": {"variant", "beta", "gamma", "mu_S", "mu_I", "N"},
}
_KARLIN_KEYS = {"n", "entries", "R"}
_KVECTOR_KEYS = {"u"}
_TREE_KEYS = {"F", "x"}
_ANALYSIS_KEYS = {"tol", "seed", "guard_n", "mu", "mu_min", "mu_max", "steps", "mu_grid",
                  "bracket", "t_end", "y0", "mu_prime", "rel_tol", "abs_tol"}


@dataclass(frozen=True)
class ProblemFile:
    schema_version: str
    network: DispersalNetwork | None = None
    leak: np.ndarray | None = None
    q: np.ndarray | None = None
    model: ModelSpec | None = None
    karlin: tuple[np.ndarray, np.ndarray] | None = None
    kvector: np.ndarray | None = None
    tree_cycle: tuple[np.ndarray | None, np.ndarray | None] | None = None
    analysis: dict[str, Any] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# strict parsing helpers
# ---------------------------------------------------------------------------


def _reject_constant(name: str):
    raise ValidationError(f"non-standard JSON constant {name}", "document")


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ValidationError(f"duplicate key {k!r}", "document")
        out[k] = v
    return out


def _obj(x, path: str, allowed: set[str], required: Iterable[str] = ()) -> dict:
    if not isinstance(x, dict):
        raise ValidationError("expected an object", path)
    unknown = sorted(set(x) - allowed)
    if unknown:
        raise ValidationError(f"unknown key {unknown[0]!r}", path)
    for k in required:
        if k not in x:
            raise ValidationError("missing required key", f"{path}.{k}")
    return x


def _num(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValidationError(f"expected a number, got {type(x).__name__}", path)
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError("non-finite number", path)
    return x


def _int(x, path: str, lo: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValidationError(f"expected an integer, got {x!r}", path)
    if lo is not None and x < lo:
        raise ValidationError(f"must be >= {lo}, got {x}", path)
    return x


def _nums(x, path: str, n: int | None = None) -> np.ndarray:
    if not isinstance(x, list):
        raise ValidationError("expected a list of numbers", path)
    if n is not None and len(x) != n:
        raise ValidationError(f"expected {n} entries, got {len(x)}", path)
    return np.array([_num(v, f"{path}[{k}]") for k, v in enumerate(x)])


def _kinds(x, path: str, n: int) -> str | tuple[str, ...]:
    if isinstance(x, str):
        return x
    if not isinstance(x, list) or len(x) != n or not all(isinstance(s, str) for s in x):
        raise ValidationError(f"expected a string or a list of {n} strings", path)
    return tuple(x)


def _field_path(exc: ValidationError, prefix: str) -> ValidationError:
    msg = str(exc)
    if exc.field:
        msg = msg[len(exc.field) + 2:]
        return ValidationError(msg, f"{prefix}.{exc.field}")
    return ValidationError(msg, prefix)


# ---------------------------------------------------------------------------
# blocks
# ---------------------------------------------------------------------------


def _network(x, path: str) -> tuple[DispersalNetwork, np.ndarray | None]:
    x = _obj(x, path, _NETWORK_KEYS, ("n", "edges"))
    n = _int(x["n"], f"{path}.n", 1)
    edges = x["edges"]
    if not isinstance(edges, list):
        raise ValidationError("expected a list of [i, j, rate] triplets", f"{path}.edges")
    trip = []
    for k, e in enumerate(edges):
        ep = f"{path}.edges[{k}]"
        if not isinstance(e, list) or len(e) != 3:
            raise ValidationError("expected [i, j, rate]", ep)
        i = _int(e[0], f"{ep}[0]", 1)
        j = _int(e[1], f"{ep}[1]", 1)
        if i > n or j > n:
            raise ValidationError(f"patch index out of range 1..{n}", ep)
        rate = _num(e[2], f"{ep}[2]")
        if rate < 0:
            raise ValidationError(f"negative movement rate {rate!r}", f"{ep}[2]")
        trip.append((i - 1, j - 1, rate))
    diag = _nums(x["diag"], f"{path}.diag", n) if "diag" in x else None
    leak = None
    if "leak" in x:
        leak = _nums(x["leak"], f"{path}.leak", n)
        if np.any(leak < 0):
            raise ValidationError("leak rates must be non-negative", f"{path}.leak")
    try:
        G = network_from_triplets(n, trip, diag)
    except ValidationError as exc:
        raise _field_path(exc, path) from None
    return G, leak


def _model(x, G: DispersalNetwork | None, leak, path: str) -> ModelSpec:
    if not isinstance(x, dict) or "variant" not in x:
        raise ValidationError("expected an object with a 'variant' key", path)
    variant = x["variant"]
    if variant not in _MODEL_KEYS:
        raise ValidationError(f"unknown variant {variant!r}", f"{path}.variant")
    _obj(x, path, _MODEL_KEYS[variant])
    if G is None:
        raise ValidationError("a model needs a network block", "network")
    n = G.n

    def vec(key, required=True):
        if key not in x:
            if required:
                raise ValidationError("missing required key", f"{path}.{key}")
            return None
        return _nums(x[key], f"{path}.{key}", n)

    def rate(key):
        if key not in x:
            raise ValidationError("missing required key", f"{path}.{key}")
        return _num(x[key], f"{path}.{key}")

    try:
        if variant == "single":
            growth = _kinds(x.get("growth", "logistic"), f"{path}.growth", n)
            return SingleSpecies(G, rate("mu"), growth, r=vec("r", False), K=vec("K", False),
                                 p=vec("p", False), eps=leak)
        if variant == "predprey":
            B = G
            if "predator_network" in x:
                B, _ = _network(x["predator_network"], f"{path}.predator_network")
                if B.n != n:
                    raise ValidationError(f"expected n = {n}", f"{path}.predator_network.n")
            response = _kinds(x.get("response", "lotka"), f"{path}.response", n)
            return PredatorPrey(G, B, vec("r"), vec("K"), vec("c"), vec("d"), rate("mu_u"),
                                rate("mu_v"), response, vec("half", False))
        if variant == "competition":
            return Competition(G, vec("p"), rate("mu_u"), rate("mu_v"))
        return SIS(G, vec("beta"), vec("gamma"), rate("mu_S"), rate("mu_I"),
                   rate("N") if "N" in x else 1.0)
    except ValidationError as exc:
        if exc.field and exc.field.startswith(path):
            raise
        raise _field_path(exc, path) from None


def _karlin(x, path: str) -> tuple[np.ndarray, np.ndarray]:
    x = _obj(x, path, _KARLIN_KEYS, ("n", "entries", "R"))
    n = _int(x["n"], f"{path}.n", 1)
    P = np.zeros((n, n))
    seen = set()
    if not isinstance(x["entries"], list):
        raise ValidationError("expected a list of [i, j, value] triplets", f"{path}.entries")
    for k, e in enumerate(x["entries"]):
        ep = f"{path}.entries[{k}]"
        if not isinstance(e, list) or len(e) != 3:
            raise ValidationError("expected [i, j, value]", ep)
        i, j = _int(e[0], f"{ep}[0]", 1), _int(e[1], f"{ep}[1]", 1)
        if i > n or j > n:
            raise ValidationError(f"index out of range 1..{n}", ep)
        if (i, j) in seen:
            raise ValidationError(f"duplicate entry ({i}, {j})", ep)
        seen.add((i, j))
        P[i - 1, j - 1] = _num(e[2], f"{ep}[2]")
    return P, _nums(x["R"], f"{path}.R", n)


def _tree_cycle(x, n: int | None, path: str):
    x = _obj(x, path, _TREE_KEYS)
    F = None
    if "F" in x:
        if n is None:
            raise ValidationError("needs a network block", path)
        F = np.full((n, n), np.nan)
        if not isinstance(x["F"], list):
            raise ValidationError("expected a list of [i, j, value] triplets", f"{path}.F")
        for k, e in enumerate(x["F"]):
            ep = f"{path}.F[{k}]"
            if not isinstance(e, list) or len(e) != 3:
                raise ValidationError("expected [i, j, value]", ep)
            i, j = _int(e[0], f"{ep}[0]", 1), _int(e[1], f"{ep}[1]", 1)
            if i > n or j > n:
                raise ValidationError(f"index out of range 1..{n}", ep)
            if not np.isnan(F[i - 1, j - 1]):
                raise ValidationError(f"duplicate entry ({i}, {j})", ep)
            F[i - 1, j - 1] = _num(e[2], f"{ep}[2]")
    xv = _nums(x["x"], f"{path}.x", n) if "x" in x else None
    return F, xv


def _analysis(x, path: str) -> dict[str, Any]:
    x = _obj(x, path, _ANALYSIS_KEYS)
    out: dict[str, Any] = {}
    for k, v in x.items():
        p = f"{path}.{k}"
        if k in ("seed", "steps", "guard_n"):
            out[k] = _int(v, p, 0)
        elif k in ("mu_grid", "y0", "bracket"):
            out[k] = [float(t) for t in _nums(v, p)]
        else:
            out[k] = _num(v, p)
    return out


def parse_problem(doc: Any) -> ProblemFile:
    doc = _obj(doc, "document", _TOP_KEYS, ("schema_version",))
    ver = doc["schema_version"]
    if ver != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {ver!r} (expected "
                              f"{SCHEMA_VERSION!r})", "schema_version")
    G, leak = _network(doc["network"], "network") if "network" in doc else (None, None)
    n = G.n if G is not None else None
    q = None
    if "q" in doc:
        if G is None:
            raise ValidationError("needs a network block", "q")
        q = _nums(doc["q"], "q", n)
    model = _model(doc["model"], G, leak, "model") if "model" in doc else None
    karlin = _karlin(doc["karlin"], "karlin") if "karlin" in doc else None
    kvec = None
    if "kvector" in doc:
        kv = _obj(doc["kvector"], "kvector", _KVECTOR_KEYS, ("u",))
        kvec = _nums(kv["u"], "kvector.u")
    tc = _tree_cycle(doc["tree_cycle"], n, "tree_cycle") if "tree_cycle" in doc else None
    analysis = _analysis(doc["analysis"], "analysis") if "analysis" in doc else {}
    return ProblemFile(ver, G, leak, q, model, karlin, kvec, tc, analysis)


def load_problem(path) -> ProblemFile:
    """Read and validate a problem file.

    Syntax errors carry the line and column; schema errors carry the field path.
    ``OSError`` propagates unchanged for the caller to map.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text, parse_constant=_reject_constant,
                         object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}",
                              str(path)) from None
    return parse_problem(doc)


# ---------------------------------------------------------------------------
# re-serialization
# ---------------------------------------------------------------------------


def _plain(v):
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return int(f) if f.is_integer() and abs(f) < 2 ** 53 else f
    if isinstance(v, tuple):
        return list(v)
    return v


def _dump_network(G: DispersalNetwork, leak) -> dict:
    off = G.offdiag()
    tgt, src = np.nonzero(off)
    edges = sorted([int(i) + 1, int(j) + 1, _plain(off[i, j])] for i, j in zip(tgt, src))
    out: dict[str, Any] = {"n": G.n, "edges": edges}
    if G.diag_rule == "supplied":
        out["diag"] = _plain(np.diag(G.a).copy())
    if leak is not None:
        out["leak"] = _plain(leak)
    return out


def dump_problem(prob: ProblemFile) -> dict:
    """Inverse of :func:`parse_problem` up to formatting and key order."""
    out: dict[str, Any] = {"schema_version": prob.schema_version}
    if prob.network is not None:
        out["network"] = _dump_network(prob.network, prob.leak)
    if prob.q is not None:
        out["q"] = _plain(prob.q)
    m = prob.model
    if isinstance(m, SingleSpecies):
        d = {"variant": "single", "mu": _plain(m.mu),
             "growth": m.growth[0] if len(set(m.growth)) == 1 else list(m.growth)}
        logi = m.logistic_mask
        if logi.any():
            d["r"], d["K"] = _plain(m.r), _plain(m.K)
        if (~logi).any():
            d["p"] = _plain(m.p)
        out["model"] = d
    elif isinstance(m, PredatorPrey):
        d = {"variant": "predprey", "r": _plain(m.r), "K": _plain(m.K), "c": _plain(m.c),
             "d": _plain(m.d), "mu_u": _plain(m.mu_u), "mu_v": _plain(m.mu_v),
             "response": m.response[0] if len(set(m.response)) == 1 else list(m.response)}
        if "monod" in m.response:
            d["half"] = _plain(m.half)
        if m.predator is not m.prey:
            d["predator_network"] = _dump_network(m.predator, None)
        out["model"] = d
    elif isinstance(m, Competition):
        out["model"] = {"variant": "competition", "p": _plain(m.p), "mu_u": _plain(m.mu_u),
                        "mu_v": _plain(m.mu_v)}
    elif isinstance(m, SIS):
        out["model"] = {"variant": "sis", "beta": _plain(m.beta), "gamma": _plain(m.gamma),
                        "mu_S": _plain(m.mu_S), "mu_I": _plain(m.mu_I), "N": _plain(m.N)}
    if prob.karlin is not None:
        P, R = prob.karlin
        ii, jj = np.nonzero(P)
        out["karlin"] = {"n": P.shape[0],
                         "entries": [[int(i) + 1, int(j) + 1, _plain(P[i, j])]
                                     for i, j in zip(ii, jj)],
                         "R": _plain(R)}
    if prob.kvector is not None:
        out["kvector"] = {"u": _plain(prob.kvector)}
    if prob.tree_cycle is not None:
        F, x = prob.tree_cycle
        d = {}
        if F is not None:
            ii, jj = np.nonzero(~np.isnan(F))
            d["F"] = [[int(i) + 1, int(j) + 1, _plain(F[i, j])] for i, j in zip(ii, jj)]
        if x is not None:
            d["x"] = _plain(x)
        out["tree_cycle"] = d
    if prob.analysis:
        out["analysis"] = {k: _plain(v) for k, v in prob.analysis.items()}
    return out


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def format_float(x: float) -> str:
    """17 significant digits: parses back to the identical double."""
    return format(float(x), ".17g")


def csv_text(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(rows: Iterable[Sequence[float]], path, header: Sequence[str]) -> None:
    """Write ``rows`` as UTF-8 CSV with a header line and ``\\n`` line ends."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows))
