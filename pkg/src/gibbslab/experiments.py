"""Experiment drivers shared by the command line and the acceptance suite.

Each ``run_*`` function takes an :class:`ExperimentConfig` and returns a
report object with ``rows`` (list of dicts), a ``violation`` flag and a
``to_csv()`` method.  Every row carries the seed and config hash.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, fields, replace
from dataclasses import field as dc_field

import numpy as np

from .factor import (InconsistentMarginals, apply_block_code, builtin_code, edge_vertex_slack, empirical_dists,
                     factor_marginals_exact)
from .gibbs import (ENUMERATION_CAP, CapExceeded, Potential, brute_force_gibbs, glauber_sample,
                    ising_tables, potts_tables, transfer_potential)
from .graph import load_graph, niceness_audit, random_covering
from .info import Observable, entropy, entropy_miller_madow, pinsker_report
from .kernels import count_good_colorings
from .rng import integers_below, make_rng
from .tables import DistTable
from .tree import bp_solve, chain_from_bp, decay_table, joint_at_distance

VIOLATION_TOL = 1e-9


def _int_list(text):
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).replace(",", " ").split()]


def _str_list(text):
    if isinstance(text, (list, tuple)):
        return [str(x) for x in text]
    return [x for x in str(text).replace(",", " ").split()]


@dataclass
class ExperimentConfig:
    model: str = "ising"
    beta: float = 0.4
    field: float = 0.0
    q: int = 3
    d: int = 3
    graph: str = "K4"
    code: list = dc_field(default_factory=lambda: ["identity"])
    n: list = dc_field(default_factory=lambda: [100])
    r: int = 1
    eps: float = 0.1
    seed: int = 0
    trials: int = 10
    sweeps: int = 100
    thin: int = 10
    k_max: int = 8
    method: str = "auto"
    target: str = "uniform"
    edge: int = 0
    b_u: int = 0
    b_v: int = 0
    bootstrap: int = 1000
    out: str | None = None

    _CONVERTERS = {"beta": float, "field": float, "eps": float, "q": int, "d": int, "r": int,
                   "seed": int, "trials": int, "sweeps": int, "thin": int, "k_max": int,
                   "edge": int, "b_u": int, "b_v": int, "bootstrap": int,
                   "n": _int_list, "code": _str_list}

    def __post_init__(self):
        for name, conv in self._CONVERTERS.items():
            setattr(self, name, conv(getattr(self, name)))
        if not math.isfinite(self.beta) or not math.isfinite(self.field):
            raise ValueError("beta and field must be finite")
        if any(N < 1 for N in self.n):
            raise ValueError("N must be at least 1")
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if self.model not in ("ising", "potts"):
            raise ValueError(f"unknown model {self.model!r}")

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    @staticmethod
    def parse_file(path):
        """``key=value`` lines; ``#`` comments; dashes in keys become underscores."""
        values = {}
        with open(path) as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, val = line.partition("=")
                if not sep:
                    raise ValueError(f"expected key=value, got {raw!r}")
                values[key.strip().replace("-", "_")] = val.strip()
        unknown = set(values) - set(ExperimentConfig.keys())
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return values

    def config_hash(self):
        items = [(k, getattr(self, k)) for k in self.keys() if k != "out"]
        text = ";".join(f"{k}={v!r}" for k, v in items)
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def tables(self):
        """``(alphabet, field table, pair table)`` of the configured model."""
        if self.model == "ising":
            h, J = ising_tables(self.beta, self.field)
            return (0, 1), h, J
        h, J = potts_tables(self.q, self.beta, self.field)
        return tuple(range(self.q)), h, J

    def observable(self):
        """Spin ``2a - 1`` for Ising; indicator of symbol 0 for Potts."""
        if self.model == "ising":
            return Observable([-1.0, 1.0])
        return Observable((np.arange(self.q) == 0).astype(float))

    def potential(self, graph):
        alphabet, h, J = self.tables()
        return Potential.homogeneous(graph, alphabet, h, J)


@dataclass
class Report:
    header: list
    rows: list
    violation: bool = False
    meta: dict = dc_field(default_factory=dict)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.header, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: _fmt(row.get(k, "")) for k in self.header})
        return buf.getvalue()


def _fmt(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return "" if x is None else str(x)


def _stamp(rows, cfg):
    h = cfg.config_hash()
    for row in rows:
        row.setdefault("seed", cfg.seed)
        row["config_hash"] = h
    return rows


# --------------------------------------------------------------------------
# decay of mutual information on T_d


def solve_tree(cfg):
    alphabet, h, J = cfg.tables()
    bp = bp_solve(cfg.d, J, h, seed=cfg.seed)
    return chain_from_bp(bp, cfg.d, J, h, alphabet), bp


DECAY_COLUMNS = ["k", "mutual_info", "entropy", "ratio", "bound", "pass", "covariance",
                 "tv", "pinsker_bound", "cov_bound", "flag", "seed", "config_hash"]


def run_decay(cfg):
    chain, bp = solve_tree(cfg)
    obs = cfg.observable()
    rows = []
    violation = False
    for r in decay_table(chain, cfg.k_max):
        rep = pinsker_report(joint_at_distance(chain, r.k), obs, obs)
        chain_ok = (rep["tv"] <= rep["pinsker"] + 1e-10
                    and abs(rep["cov"]) <= rep["cov_bound"] + 1e-10)
        row = {"k": r.k, "mutual_info": r.mutual_info, "entropy": r.entropy,
               "ratio": r.ratio, "bound": float(r.bound), "covariance": rep["cov"],
               "tv": rep["tv"], "pinsker_bound": rep["pinsker"], "cov_bound": rep["cov_bound"]}
        if bp.unique:
            row["pass"] = bool(r.passed and chain_ok)
            row["flag"] = "unique"
            violation |= not row["pass"]
        else:
            row["pass"] = None
            row["flag"] = "nonunique"
        rows.append(row)
    return Report(DECAY_COLUMNS, _stamp(rows, cfg), violation,
                  {"unique": bp.unique, "chain": chain})


# --------------------------------------------------------------------------
# edge-vertex inequality


def is_tree(g):
    return g.m == g.n - 1


def exact_factor_tables(g, cfg, code):
    """Per-vertex and per-edge factor laws under the unique Gibbs measure of the cover.

    Regular bases of degree at least 3 use the tree chain; tree bases are
    their own universal cover and are enumerated directly.
    """
    deg = g.degree()
    if g.is_regular() and deg[0] >= 3:
        alphabet, h, J = cfg.tables()
        bp = bp_solve(int(deg[0]), J, h, seed=cfg.seed)
        chain = chain_from_bp(bp, int(deg[0]), J, h, alphabet)
        mu_v, mu_e = factor_marginals_exact(chain, code)
        return [mu_v] * g.n, [mu_e] * g.m, bp.unique
    if is_tree(g):
        nu = brute_force_gibbs(g, cfg.potential(g))
        return _tree_factor_tables(g, nu, code) + (True,)
    raise ValueError("exact marginals need a regular base of degree >= 3 or a tree")


def _tree_factor_tables(g, nu, code):
    from .factor import pattern_at

    qb = len(code.out_alphabet)
    nbrs = lambda v: g.neighbors(v).tolist()  # noqa: E731
    vt = np.zeros((g.n, qb))
    et = np.zeros((g.m, qb, qb))
    it = np.nditer(nu.probs, flags=["multi_index"])
    for p in it:
        labels = it.multi_index
        out = [code(pattern_at(nbrs, labels, v, code.radius)) for v in range(g.n)]
        vt[np.arange(g.n), out] += p
        for e, (u, v) in enumerate(g.edges.tolist()):
            et[e, out[u], out[v]] += p
    return ([DistTable((v,), code.out_alphabet, vt[v] / vt[v].sum()) for v in range(g.n)],
            [DistTable(("u", "v"), code.out_alphabet, et[e] / et[e].sum()) for e in range(g.m)])


def _count_slack(g, ep, H):
    deg = g.degree()
    return (sum(H(ec) for ec in ep.edge_counts)
            - sum((deg[v] - 1) * H(vc) for v, vc in enumerate(ep.vertex_counts)))


def _plugin_entropy(counts):
    return entropy(counts / counts.sum())


def mc_slack_samples(g, cfg, codes, N, trials):
    """Edge-vertex slack of each code on ``trials`` independent random coverings.

    Each trial draws a covering, one Glauber sample of the lifted potential
    and applies every code to that same sample.  Returns two dicts
    ``{code name: array}``: Miller-Madow corrected slacks, and plug-in slacks
    (biased low by ``O(1 / N)``).
    """
    pot = cfg.potential(g)
    out = {c.name: np.empty(trials) for c in codes}
    plugin = {c.name: np.empty(trials) for c in codes}
    max_r = max(c.radius for c in codes)
    for t in range(trials):
        cov = random_covering(g, N, (cfg.seed, 1, N, t))
        sample = glauber_sample(cov.graph, transfer_potential(pot, cov), cfg.sweeps,
                                (cfg.seed, 2, N, t))
        nice = niceness_audit(cov, max_r).nice if max_r > 0 else None
        for c in codes:
            y = apply_block_code(cov, sample, c, nice=nice)
            ep = empirical_dists(cov, y, c.out_alphabet)
            if ep.marginal_mismatch(g):
                raise InconsistentMarginals("fiber counts are not consistent")
            out[c.name][t] = _count_slack(g, ep, entropy_miller_madow)
            plugin[c.name][t] = _count_slack(g, ep, _plugin_entropy)
    return out, plugin


EDGE_VERTEX_COLUMNS = ["graph", "model", "beta", "code", "method", "slack", "stderr",
                       "plugin_slack", "trials", "N", "agree", "pass", "seed", "config_hash"]


def run_edge_vertex(cfg, graph=None):
    g = graph if graph is not None else load_graph(cfg.graph)
    alphabet, _, _ = cfg.tables()
    codes = [builtin_code(name, alphabet) for name in cfg.code]
    exact_ok = (g.is_regular() and g.degree()[0] >= 3) or is_tree(g)
    method = cfg.method
    if method == "auto":
        method = "exact" if exact_ok else "mc"
    rows = []
    violation = False
    exact = {}
    if method in ("exact", "both"):
        for c in codes:
            mv, me, unique = exact_factor_tables(g, cfg, c)
            s = edge_vertex_slack(g, mv, me)
            exact[c.name] = s
            ok = s >= -VIOLATION_TOL if unique else None
            violation |= ok is False
            rows.append({"graph": cfg.graph, "model": cfg.model, "beta": cfg.beta,
                         "code": c.name, "method": "exact", "slack": s, "stderr": 0.0,
                         "trials": 0, "N": "", "agree": "", "pass": ok})
    if method in ("mc", "both"):
        N = cfg.n[-1]
        samples, plugin = mc_slack_samples(g, cfg, codes, N, cfg.trials)
        for c in codes:
            vals = samples[c.name]
            mean = float(vals.mean())
            se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("nan")
            agree = ""
            if c.name in exact:
                agree = bool(abs(mean - exact[c.name]) <= 3 * se + 1e-12)
                violation |= not agree
            rows.append({"graph": cfg.graph, "model": cfg.model, "beta": cfg.beta,
                         "code": c.name, "method": "mc", "slack": mean,
                         "stderr": se, "plugin_slack": float(plugin[c.name].mean()),
                         "trials": len(vals), "N": N, "agree": agree,
                         "pass": bool(mean >= -3 * se - VIOLATION_TOL)})
    return Report(EDGE_VERTEX_COLUMNS, _stamp(rows, cfg), violation)


# --------------------------------------------------------------------------
# counting good colorings


@dataclass(frozen=True)
class CountResult:
    counts: tuple
    N: int
    predicted_rate: float

    @property
    def count(self):
        return float(np.mean(self.counts))

    @property
    def rate(self):
        return math.log(self.count) / self.N if self.count > 0 else float("-inf")


def run_count_colorings(base, N, mu_v, mu_e, eps, seed=0, trials=1, cap=ENUMERATION_CAP):
    """Exhaustive count of colorings of random coverings with every edge law ``eps``-close.

    ``mu_e[e]`` is a ``(q, q)`` table on base edge ``e``; the count is
    averaged over ``trials`` independent coverings.
    """
    q = np.asarray(getattr(mu_e[0], "probs", mu_e[0])).shape[0]
    n_vertices = N * base.n
    if q ** n_vertices > cap:
        raise CapExceeded(f"{q}^{n_vertices} colorings exceed the enumeration cap {cap}")
    target = np.stack([np.asarray(getattr(t, "probs", t), dtype=np.float64).ravel()
                       for t in mu_e])
    counts = []
    for t in range(trials):
        cov = random_covering(base, N, (seed, 3, N, t))
        counts.append(count_good_colorings(n_vertices, q, cov.lift_a, cov.lift_b,
                                           cov.lift_base, N, target, eps))
    predicted = edge_vertex_slack(base, mu_v, mu_e)
    return CountResult(tuple(counts), N, predicted)


COUNT_COLUMNS = ["N", "count", "rate", "predicted_rate", "eps", "trials", "seed", "config_hash"]


def count_targets(g, cfg):
    """Consistent target laws for ``count-colorings``: uniform, point or model."""
    q = 2 if cfg.model == "ising" else cfg.q
    if cfg.target == "uniform":
        me = np.full((q, q), 1.0 / q ** 2)
        mv = np.full(q, 1.0 / q)
        return [mv] * g.n, [me] * g.m
    if cfg.target == "point":
        me = np.zeros((q, q))
        me[0, 0] = 1.0
        mv = np.eye(q)[0]
        return [mv] * g.n, [me] * g.m
    if cfg.target == "model":
        alphabet = tuple(range(q))
        mv, me, _ = exact_factor_tables(g, cfg, builtin_code("identity", alphabet))
        return [t.probs for t in mv], [t.probs for t in me]
    raise ValueError(f"unknown target {cfg.target!r}")


def run_count(cfg, graph=None):
    g = graph if graph is not None else load_graph(cfg.graph)
    mv, me = count_targets(g, cfg)
    rows = []
    for N in cfg.n:
        res = run_count_colorings(g, N, mv, me, cfg.eps, cfg.seed, max(1, cfg.trials))
        rows.append({"N": N, "count": res.count, "rate": res.rate,
                     "predicted_rate": res.predicted_rate, "eps": cfg.eps,
                     "trials": len(res.counts)})
    return Report(COUNT_COLUMNS, _stamp(rows, cfg), False)


# --------------------------------------------------------------------------
# concentration of edge frequencies


def bootstrap_variance_ci(values, reps, seed, level=0.95):
    """Percentile bootstrap interval for the sample variance."""
    x = np.asarray(values, dtype=np.float64)
    rng = make_rng(seed, 7)
    idx = integers_below(rng, len(x), reps * len(x)).reshape(reps, len(x))
    stats = x[idx].var(axis=1, ddof=1)
    lo, hi = np.quantile(stats, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def edge_frequency_samples(g, cfg, N, trials):
    """``mu_e^c({(b_u, b_v)})`` over independent coverings and Glauber samples.

    Also returns the per-trial fraction of ``r``-nice lifts of the chosen edge.
    """
    pot = cfg.potential(g)
    alphabet, _, _ = cfg.tables()
    code = builtin_code(cfg.code[0], alphabet)
    vals = np.empty(trials)
    nice_frac = np.empty(trials)
    for t in range(trials):
        cov = random_covering(g, N, (cfg.seed, 4, N, t))
        sample = glauber_sample(cov.graph, transfer_potential(pot, cov), cfg.sweeps,
                                (cfg.seed, 5, N, t))
        audit = niceness_audit(cov, max(1, cfg.r))
        y = apply_block_code(cov, sample, code, nice=audit.nice)
        ep = empirical_dists(cov, y, code.out_alphabet)
        vals[t] = ep.edge_counts[cfg.edge, cfg.b_u, cfg.b_v] / N
        nice_frac[t] = audit.edge_fractions[cfg.edge]
    return vals, nice_frac


CONCENTRATION_COLUMNS = ["N", "var", "ci_low", "ci_high", "nice_fraction", "mean", "trials",
                         "seed", "config_hash"]


def run_concentration(cfg, graph=None):
    g = graph if graph is not None else load_graph(cfg.graph)
    rows = []
    for N in cfg.n:
        vals, nice = edge_frequency_samples(g, cfg, N, cfg.trials)
        lo, hi = bootstrap_variance_ci(vals, cfg.bootstrap, (cfg.seed, N))
        rows.append({"N": N, "var": float(vals.var(ddof=1)), "ci_low": lo, "ci_high": hi,
                     "nice_fraction": float(nice.mean()), "mean": float(vals.mean()),
                     "trials": cfg.trials})
    return Report(CONCENTRATION_COLUMNS, _stamp(rows, cfg), False)


# --------------------------------------------------------------------------
# niceness of random coverings


COVER_COLUMNS = ["N", "R", "median_vertex_fraction", "median_edge_fraction",
                 "achieving_fraction", "trials", "seed", "config_hash"]


def cover_niceness(g, N, R, eps, trials, seed):
    """Per-trial minimum vertex and edge nice fractions and ``(R, eps)``-niceness flags."""
    vmin = np.empty(trials)
    emin = np.empty(trials)
    ok = np.empty(trials, bool)
    for t in range(trials):
        audit = niceness_audit(random_covering(g, N, (seed, 6, N, t)), R)
        vmin[t] = audit.vertex_fractions.min()
        emin[t] = audit.edge_fractions.min()
        ok[t] = audit.is_nice(eps)
    return vmin, emin, ok


def run_cover_stats(cfg, graph=None):
    g = graph if graph is not None else load_graph(cfg.graph)
    rows = []
    for N in cfg.n:
        vmin, emin, ok = cover_niceness(g, N, cfg.r, cfg.eps, cfg.trials, cfg.seed)
        rows.append({"N": N, "R": cfg.r, "median_vertex_fraction": float(np.median(vmin)),
                     "median_edge_fraction": float(np.median(emin)),
                     "achieving_fraction": float(ok.mean()), "trials": cfg.trials})
    return Report(COVER_COLUMNS, _stamp(rows, cfg), False)


def with_overrides(cfg, **kwargs):
    return replace(cfg, **kwargs)
