"""Support library for generated inference programs.

Generated code defines one class per model template (random function,
number variable, observation or query node) with ``resample``,
``accept_value``, ``add_to_Ch``/``del_from_Ch``, ``likelihood``, ``getval``
and ``getcache`` entry points, and links against the primitives here:

  * RunCtx: RNG stream, instrumentation counters, proposal scratch state;
  * NodeBase: the per-instance memo cell (value + mark, proposal cache +
    cache mark, children/contingent sets, pin and position bookkeeping);
  * Registry: the set of instantiated variables (the current world), with
    O(1) selection, swap-removal, and the zero-reference removal sweep;
  * acceptance-ratio assembly in log space with NaN screening;
  * RunStats accumulation and the stats JSON schema;
  * the CLI shim shared by all emitted programs.

Counter conventions: ``rng_calls`` counts distribution sample draws (the
uniform used for variable selection and the accept/reject coin are not
model draws and are excluded); ``likelihood_evals`` counts per-variable
conditional-density evaluations.

Threading: one chain owns its RunCtx/Registry exclusively; nothing here is
shared between chains.
"""

from __future__ import annotations

import json
import math
import random
import time

from .errors import InfeasibleEvidence, RuntimeFault

NEG_INF = float("-inf")
POS_INF = float("inf")


class RetryInit(Exception):
    """Internal: initial world construction hit an evidence conflict."""


class RunCtx:
    __slots__ = ("rng", "rng_calls", "likelihood_evals", "accepted",
                 "rejected", "gen", "proposed", "recorder")

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.rng_calls = 0
        self.likelihood_evals = 0
        self.accepted = 0
        self.rejected = 0
        self.gen = 0
        self.proposed = []
        self.recorder = None


def bump_generation(ctx: RunCtx) -> None:
    """Invalidate all memoized marks in O(1) by advancing the generation."""
    ctx.gen += 1


class NodeBase:
    """Per-instance state cell; generated classes subclass with empty slots.

    ``mark`` is the instantiated flag (MH worlds) or the generation stamp
    (likelihood weighting).  ``cached``/``cmark`` hold the current
    proposal's value.  ``Ch``/``Cont`` are insertion-ordered sets (dicts)
    of dependent nodes; ``cnt`` is the explicit reference counter used by
    builds that do not maintain children sets.  ``pin`` counts evidence
    statements currently forcing this instance; ``apos`` is the position in
    the selectable list, -1 when not selectable.
    """

    __slots__ = ("i", "val", "mark", "cached", "cmark", "Ch", "Cont",
                 "pin", "apos", "cnt")

    template = "?"
    rc_tracked = False
    is_var = True       # obs/query pseudo-nodes override with False
    is_query = False

    def __init__(self, i: int = 0):
        self.i = i
        self.val = None
        self.mark = 0
        self.cached = None
        self.cmark = -1
        self.Ch = {}
        self.Cont = {}
        self.pin = 0
        self.apos = -1
        self.cnt = 0

    def name(self) -> str:
        if type(self).template.startswith("#") or not _has_params(self):
            return type(self).template
        return f"{type(self).template}({self.i})"

    # Generated subclasses override the entry points they need.
    def likelihood(self) -> float:
        return 0.0

    def likelihood_cache(self) -> float:
        return 0.0

    def add_to_Ch(self) -> None:
        pass

    def del_from_Ch(self) -> None:
        pass

    def ref_diff(self, vac, gain, pin_old, pin_new) -> None:
        pass


def _has_params(h) -> bool:
    return getattr(type(h), "arity", 1) > 0


class Registry:
    """The current possible world: instantiated variables and selection."""

    __slots__ = ("ctx", "active", "dirty", "tables", "ev_nodes", "q_nodes",
                 "rc_enabled", "use_cnt", "pinned")

    def __init__(self, ctx: RunCtx, rc_enabled: bool = True,
                 use_cnt: bool = False):
        self.ctx = ctx
        self.active = []
        self.dirty = {}
        self.tables = {}     # template name -> list of handles (or [handle])
        self.ev_nodes = []
        self.q_nodes = []
        self.rc_enabled = rc_enabled
        self.use_cnt = use_cnt

    # -- selectable list ----------------------------------------------------

    def activate(self, h) -> None:
        if h.apos < 0:
            h.apos = len(self.active)
            self.active.append(h)

    def deactivate(self, h) -> None:
        p = h.apos
        if p < 0:
            return
        a = self.active
        last = a[-1]
        a[p] = last
        last.apos = p
        a.pop()
        h.apos = -1

    def size(self) -> int:
        return len(self.active)

    def refs(self, h) -> int:
        return h.cnt if self.use_cnt else len(h.Ch)

    # -- registration helpers (called by generated add/del bodies) ----------

    def reg(self, parent, child, cont: bool) -> None:
        ch = parent.Ch
        if child not in ch:
            ch[child] = None
            if parent.rc_tracked:
                self.dirty[parent] = None
        if cont:
            parent.Cont[child] = None

    def unreg(self, parent, child, cont: bool) -> None:
        if parent.Ch.pop(child, None) is None:
            pass
        elif parent.rc_tracked:
            self.dirty[parent] = None
        if cont:
            parent.Cont.pop(child, None)

    def inc_cnt(self, h) -> None:
        h.cnt += 1
        if h.rc_tracked:
            self.dirty[h] = None

    def dec_cnt(self, h) -> None:
        h.cnt -= 1
        if h.cnt < 0:
            raise RuntimeFault(f"reference count of {h.name()} fell below zero")
        if h.rc_tracked:
            self.dirty[h] = None

    def pin_handle(self, h) -> None:
        h.pin += 1
        self.dirty[h] = None

    def unpin_handle(self, h) -> None:
        h.pin -= 1
        if h.pin < 0:
            raise RuntimeFault(f"pin count of {h.name()} fell below zero")
        self.dirty[h] = None

    # -- world maintenance ---------------------------------------------------

    def reconcile(self) -> None:
        """Process membership changes queued by registration helpers.

        Zero-reference tracked variables leave the world (recursively
        releasing their own references); pin transitions move instances in
        and out of the selectable list.
        """
        dirty = self.dirty
        while dirty:
            h = next(iter(dirty))
            del dirty[h]
            if (self.rc_enabled and h.mark and h.rc_tracked and h.pin == 0
                    and self.refs(h) == 0):
                h.mark = 0
                self.deactivate(h)
                h.del_from_Ch()
                continue
            if h.is_var and h.mark and h.pin == 0:
                self.activate(h)
            else:
                self.deactivate(h)

    def commit_proposed(self) -> list:
        """Copy cached proposal values into the committed world; returns the
        handles that were newly instantiated by this proposal."""
        fresh = []
        for h in self.ctx.proposed:
            if not h.mark:
                fresh.append(h)
                h.mark = 1
            h.val = h.cached
        return fresh

    def finish_accept(self, fresh: list) -> None:
        for h in fresh:
            h.add_to_Ch()
            self.dirty[h] = None
        self.reconcile()

    def finalize_init(self, order: list) -> None:
        """Populate the selectable list after initial-world construction."""
        self.active = []
        for h in order:
            h.apos = -1
            if h.is_var and h.mark and h.pin == 0:
                h.apos = len(self.active)
                self.active.append(h)
        self.dirty.clear()

    # -- introspection (debug oracle, tests) ---------------------------------

    def all_handles(self):
        for name in self.tables:
            for h in self.tables[name]:
                yield h

    def world_snapshot(self) -> dict:
        return {h.name(): h.val for h in self.all_handles() if h.mark}

    def pinned_names(self) -> list:
        return [h.name() for h in self.all_handles() if h.mark and h.pin > 0]

    def state_fingerprint(self) -> tuple:
        rows = []
        for h in self.all_handles():
            rows.append((h.name(), h.mark, h.val, h.pin, h.cnt, h.apos,
                         tuple(c.name() for c in h.Ch),
                         tuple(c.name() for c in h.Cont)))
        for nodes in (self.ev_nodes, self.q_nodes):
            for e in nodes:
                rows.append((e.name(),
                             tuple(c.name() for c in e.Ch),
                             tuple(c.name() for c in e.Cont)))
        rows.append(tuple(h.name() for h in self.active))
        return tuple(rows)


# ---------------------------------------------------------------------------
# acceptance ratio


def accept_log_ratio(name: str, sel_old: int, sel_new: int,
                     lp_old: float, lp_new: float,
                     lik_old: float, lik_new: float) -> float:
    """Log acceptance ratio for a parental proposal.

    ``lp_old``/``lp_new`` are the prior densities of the old/new value under
    the (unchanged) parents; ``lik_old``/``lik_new`` the child-factor sums;
    ``sel_old``/``sel_new`` the selectable world sizes.  The densities of
    variables instantiated or released by the move cancel against the
    proposal and do not appear.
    """
    if sel_new <= 0:
        raise RuntimeFault(f"proposal for {name} empties the world")
    num = lp_old + lik_new + math.log(sel_old)
    den = lp_new + lik_old + math.log(sel_new)
    if math.isnan(num) or math.isnan(den) or num == POS_INF or den == POS_INF:
        raise RuntimeFault(
            f"non-finite acceptance factor for {name}:"
            f" num={num!r} den={den!r}")
    if den == NEG_INF:
        raise RuntimeFault(
            f"current world has zero probability at {name}")
    return num - den


def predict_selectable_delta(reg: Registry, vac: dict, gain: dict,
                             pin_old: list, pin_new: list,
                             fresh: list) -> int:
    """Selectable-count change if the current proposal is accepted.

    ``vac``/``gain`` count tracked references vacated/added per handle;
    ``pin_old``/``pin_new`` list evidence pin targets before/after; ``fresh``
    lists handles newly instantiated by the proposal.
    """
    delta = 0
    removed = set()
    if reg.rc_enabled:
        for h, c in vac.items():
            if h.rc_tracked and reg.refs(h) == c and gain.get(h, 0) == 0:
                removed.add(h)
                if h.pin == 0:
                    delta -= 1
    fresh_set = set(fresh)
    po = {}
    for h in pin_old:
        po[h] = po.get(h, 0) + 1
    pn = {}
    for h in pin_new:
        pn[h] = pn.get(h, 0) + 1
    for h in fresh:
        if pn.get(h, 0) == 0 and h.is_var:
            delta += 1
    for h in set(po) | set(pn):
        if h in fresh_set or h in removed:
            continue
        before = h.pin
        after = h.pin - po.get(h, 0) + pn.get(h, 0)
        if before == 0 and after > 0:
            delta -= 1
        elif before > 0 and after == 0:
            delta += 1
    return delta


# ---------------------------------------------------------------------------
# run statistics


class QueryAccum:
    """Histogram / moment accumulator for one query, with batch means so
    Monte Carlo standard errors can be derived from a single run."""

    __slots__ = ("name", "namer", "hist", "wsum", "vsum", "n",
                 "batch_w", "batch_v", "batch_hist", "nbatches", "is_real")

    def __init__(self, name: str, is_real: bool, namer=None, nbatches: int = 100):
        self.name = name
        self.namer = namer
        self.is_real = is_real
        self.hist = {}
        self.wsum = 0.0
        self.vsum = 0.0
        self.n = 0
        self.nbatches = nbatches
        self.batch_w = [0.0] * nbatches
        self.batch_v = [0.0] * nbatches
        self.batch_hist = {}

    def record(self, value, weight: float, batch: int) -> None:
        self.n += 1
        self.wsum += weight
        if self.is_real:
            self.vsum += weight * value
            self.batch_w[batch] += weight
            self.batch_v[batch] += weight * value
        else:
            self.hist[value] = self.hist.get(value, 0.0) + weight
            bh = self.batch_hist.get(value)
            if bh is None:
                bh = self.batch_hist[value] = [0.0] * self.nbatches
            bh[batch] += weight
            self.batch_w[batch] += weight

    # -- summaries ------------------------------------------------------------

    def mean(self) -> float:
        if self.is_real:
            return self.vsum / self.wsum if self.wsum else float("nan")
        raise RuntimeFault(f"query {self.name} is discrete; use probs()")

    def probs(self) -> dict:
        if not self.wsum:
            return {}
        return {v: w / self.wsum for v, w in self.hist.items()}

    def prob(self, value) -> float:
        return self.probs().get(value, 0.0)

    def batch_means(self) -> list:
        if self.is_real:
            return [bv / bw for bv, bw in zip(self.batch_v, self.batch_w) if bw > 0]
        raise RuntimeFault("batch_means on a discrete query")

    def batch_probs(self, value) -> list:
        bh = self.batch_hist.get(value, [0.0] * self.nbatches)
        return [h / w for h, w in zip(bh, self.batch_w) if w > 0]

    def se_mean(self) -> float:
        return _se(self.batch_means())

    def se_prob(self, value) -> float:
        return _se(self.batch_probs(value))

    def _key(self, v) -> str:
        if self.namer is not None:
            return self.namer(v)
        if isinstance(v, bool):
            return "true" if v else "false"
        return str(v)

    def to_result(self) -> dict:
        if self.is_real:
            return {
                "query": self.name,
                "mean": self.mean(),
                "se": self.se_mean(),
                "batch_means": self.batch_means(),
            }
        probs = self.probs()
        return {
            "query": self.name,
            "histogram": {self._key(v): w for v, w in self.hist.items()},
            "probs": {self._key(v): p for v, p in probs.items()},
        }


def _se(xs: list) -> float:
    k = len(xs)
    if k < 2:
        return float("nan")
    m = sum(xs) / k
    var = sum((x - m) ** 2 for x in xs) / (k - 1)
    return math.sqrt(var / k)


class RunStats:
    """Counters and query results for one inference run."""

    def __init__(self, model: str, algo: str, n_samples: int, seed: int):
        self.model = model
        self.algo = algo
        self.n_samples = n_samples
        self.seed = seed
        self.wall_time_s = 0.0
        self.rng_calls = 0
        self.likelihood_evals = 0
        self.accepted = 0
        self.rejected = 0
        self.world_size = 0
        self.queries = []

    def accept_rate(self) -> float:
        t = self.accepted + self.rejected
        return self.accepted / t if t else 0.0

    def query(self, name: str) -> QueryAccum:
        for q in self.queries:
            if q.name == name:
                return q
        raise KeyError(name)

    def fill_from_ctx(self, ctx: RunCtx) -> None:
        self.rng_calls = ctx.rng_calls
        self.likelihood_evals = ctx.likelihood_evals
        self.accepted = ctx.accepted
        self.rejected = ctx.rejected

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "model": self.model,
            "algo": self.algo,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "wall_time_s": self.wall_time_s,
            "rng_calls": self.rng_calls,
            "likelihood_evals": self.likelihood_evals,
            "accept_rate": self.accept_rate(),
            "world_size": self.world_size,
            "query_results": [q.to_result() for q in self.queries],
        }


# ---------------------------------------------------------------------------
# proposal recording (paired oracle runs)


class ListRecorder:
    """Collects the initial world and every proposal step in memory."""

    def __init__(self):
        self.init = None
        self.steps = []

    def on_init(self, world: dict, pinned: list) -> None:
        self.init = {"world": world, "pinned": pinned}

    def on_step(self, entry: dict) -> None:
        self.steps.append(entry)


class FileRecorder:
    """Streams the proposal record as JSON lines."""

    def __init__(self, path: str):
        self.fh = open(path, "w")

    def on_init(self, world: dict, pinned: list) -> None:
        self.fh.write(json.dumps({"init": {"world": world, "pinned": pinned}}) + "\n")

    def on_step(self, entry: dict) -> None:
        self.fh.write(json.dumps(entry) + "\n")

    def close(self) -> None:
        self.fh.close()


def load_record(path: str):
    """Read a proposal record written by FileRecorder."""
    init = None
    steps = []
    with open(path) as fh:
        for line in fh:
            obj = json.loads(line)
            if "init" in obj:
                init = obj["init"]
            else:
                steps.append(obj)
    rec = ListRecorder()
    rec.init = init
    rec.steps = steps
    return rec


# ---------------------------------------------------------------------------
# CLI shim for emitted programs


def run_cli(run_fn, model_name: str, algo: str, argv=None) -> int:
    import argparse

    ap = argparse.ArgumentParser(description=f"inference program: {model_name} ({algo})")
    ap.add_argument("-n", type=int, required=True, help="number of samples/steps")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--stats", default=None, help="write stats JSON here")
    ap.add_argument("--debug-oracle", action="store_true",
                    help="cross-check every step against the reference interpreter")
    ap.add_argument("--record-proposals", default=None,
                    help="record the proposal stream as JSON lines")
    args = ap.parse_args(argv)

    recorder = None
    if args.record_proposals:
        recorder = FileRecorder(args.record_proposals)
    oracle = None
    if args.debug_oracle:
        from .debug_oracle import OracleChecker
        oracle = OracleChecker.for_emitted(model_name)

    stats = run_fn(args.n, args.seed, recorder=recorder, oracle=oracle)
    if recorder is not None and isinstance(recorder, FileRecorder):
        recorder.close()
    payload = json.dumps(stats.to_json_dict(), indent=2)
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return 0


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def check_feasible(logp: float, where: str) -> None:
    if logp == NEG_INF:
        raise RetryInit(where)
    if math.isnan(logp):
        raise RuntimeFault(f"NaN probability during {where}")


def infeasible(what: str):
    raise InfeasibleEvidence(
        f"could not construct an initial world satisfying the evidence ({what})")
