"""End-to-end orchestration for the command-line interface.

Artifacts are flat JSON/CSV files in the output directory.  Every artifact
embeds a provenance block echoing the resolved configuration; no timestamps
are written, so reruns with the same configuration and seed are
byte-identical.  Independent fits fan out over a process pool; results are
merged in enumeration order so parallel and serial runs emit identical
files.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .dcc import DccParams, filter_dcc, fit_dcc
from .decomp import METHODS, DecompMethod, decompose_path
from .errors import ConfigError, DccopulaError
from .evalkit import cokurtosis22, correlation_test, returns_loglik
from .garch import GarchParams, filter_variance, fit_garch
from .market_data import CorrInterval, bootstrap_corr_ci, correlations, ingest_rates, log_returns, sample_stats
from .paircopula import enumerate_specs, parse_spec_code
from .report import append_csv_comments, ensure_dir, intervals_figure, read_csv_rows, scatter_figure, write_csv, write_json
from .residual_fit import GaussianNd, PairCopula, StudentTNd, _fit_marginals_independent, fit_residual_model, model_correlation

ALL_METHODS = ("nodcc",) + METHODS
PARAMETRIC_MENU = ("ic", "cic", "gc", "cgc", "tc", "ctc")
SWEEP_MENU = ("pc", "cpc")
CONFIG_SCHEMA = 1
ENV_PREFIX = "DCCOPULA_"


@dataclass
class PipelineConfig:
    data: str = ""
    assets: tuple = ()
    inverse: tuple = ()
    split: str = ""
    decomp: tuple = ALL_METHODS
    tau: int = 50
    menu: tuple = PARAMETRIC_MENU
    families: tuple = ()
    pivots: tuple = (1, 2, 3)
    seed: int = 0
    jobs: int = 1
    out: str = "out"
    delimiter: str = ","
    group_label: str = "Group"
    resamples: int = 10000
    figures: bool = True
    sweep_maxiter: int = 600

    def provenance(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    def provenance_line(self) -> str:
        return json.dumps(self.provenance(), sort_keys=True)


_LIST_KEYS = {"assets", "inverse", "decomp", "menu", "families"}
_INT_KEYS = {"tau", "seed", "jobs", "resamples", "sweep_maxiter"}
_BOOL_KEYS = {"figures"}


def load_config_file(path: str) -> dict:
    """Parse a ``key = value`` configuration file with a schema marker."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    schema = values.pop("schema", None)
    if schema is None:
        raise ConfigError(f"{path}: missing 'schema = {CONFIG_SCHEMA}' line")
    if int(schema) != CONFIG_SCHEMA:
        raise ConfigError(f"{path}: unsupported schema {schema}")
    return values


def env_overrides() -> dict:
    values = {}
    for f in fields(PipelineConfig):
        env_key = ENV_PREFIX + f.name.upper()
        if env_key in os.environ:
            values[f.name] = os.environ[env_key]
    return values


def build_config(*layers: dict) -> PipelineConfig:
    """Merge string-valued option layers (later layers win) into a config."""
    known = {f.name for f in fields(PipelineConfig)}
    merged: dict = {}
    for layer in layers:
        for key, value in layer.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"unknown option {key!r}")
            merged[key] = value
    kwargs = {}
    for key, value in merged.items():
        if isinstance(value, str):
            if key in _LIST_KEYS:
                value = tuple(x.strip() for x in value.split(",") if x.strip())
            elif key in _INT_KEYS:
                value = int(value)
            elif key in _BOOL_KEYS:
                value = value.lower() in ("1", "true", "yes", "on")
            elif key == "pivots":
                value = tuple(int(x) for x in value.split(",") if x.strip())
        kwargs[key] = value
    config = PipelineConfig(**kwargs)
    decomp = tuple(m.lower() for m in config.decomp)
    if decomp == ("all",):
        decomp = ALL_METHODS
    for m in decomp:
        if m not in ALL_METHODS:
            raise ConfigError(f"unknown decomposition {m!r}; choose from {ALL_METHODS}")
    config.decomp = decomp
    config.menu = tuple(m.lower() for m in config.menu)
    if config.jobs < 0:
        raise ConfigError("jobs must be nonnegative")
    if config.jobs == 0:
        config.jobs = os.cpu_count() or 1
    return config


# ---------------------------------------------------------------------------
# shared loading


def _load_panel(config: PipelineConfig):
    if not config.data:
        raise ConfigError("no data file configured")
    if not config.split:
        raise ConfigError("no split date configured")
    panel = ingest_rates(config.data, inverse_assets=config.inverse, delimiter=config.delimiter)
    if config.assets:
        missing = [a for a in config.assets if a not in panel.asset_names]
        if missing:
            raise ConfigError(f"assets not in data file: {missing}")
        idx = [panel.asset_names.index(a) for a in config.assets]
        panel.rates = panel.rates[:, idx]
        panel.asset_names = list(config.assets)
    return panel


def _pair_indices(n: int):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _interval_seed(base_seed: int, method_idx: int, pair_idx: int) -> int:
    ss = np.random.SeedSequence(entropy=(int(base_seed), method_idx, pair_idx))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _decomp_method(tag: str, config: PipelineConfig, sigma: np.ndarray | None = None) -> DecompMethod:
    return DecompMethod(tag=tag, tau=config.tau, sigma=sigma)


# ---------------------------------------------------------------------------
# ingest


def run_ingest(config: PipelineConfig) -> None:
    """Write the normalized panel, returns, per-window statistics, and
    correlation tables."""
    ensure_dir(config.out)
    prov = config.provenance_line()
    panel = _load_panel(config)
    rp = log_returns(panel, config.split)
    s = rp.split_index

    write_csv(
        os.path.join(config.out, "panel.csv"),
        ["date"] + panel.asset_names,
        [[d.isoformat()] + [repr(v) for v in row] for d, row in zip(panel.dates, panel.rates)],
        provenance=prov,
    )
    write_csv(
        os.path.join(config.out, "returns.csv"),
        ["date", "window"] + panel.asset_names,
        [
            [d.isoformat(), "in" if i < s else "out"] + [repr(v) for v in row]
            for i, (d, row) in enumerate(zip(rp.dates, rp.returns))
        ],
        provenance=prov,
    )
    for window, sl in (("in", slice(None, s)), ("out", slice(s, None))):
        block = rp.returns[sl]
        if block.shape[0] < 4:
            continue
        stats_map = {a: sample_stats(block[:, i]).as_dict() for i, a in enumerate(rp.asset_names)}
        write_json(
            os.path.join(config.out, f"stats_{window}.json"),
            {"window": window, "stats": stats_map},
            provenance=config.provenance(),
        )
        stat_names = list(next(iter(stats_map.values())).keys())
        write_csv(
            os.path.join(config.out, f"stats_{window}.csv"),
            ["stat"] + rp.asset_names,
            [[name] + [repr(stats_map[a][name]) for a in rp.asset_names] for name in stat_names],
            provenance=prov,
        )
        linear, rank = correlations(block)
        rows = []
        for kind, mat in (("linear", linear), ("rank", rank)):
            for i, j in _pair_indices(len(rp.asset_names)):
                rows.append([kind, rp.asset_names[i], rp.asset_names[j], repr(float(mat[i, j]))])
        write_csv(
            os.path.join(config.out, f"corr_{window}.csv"),
            ["kind", "asset_i", "asset_j", "value"],
            rows,
            provenance=prov,
        )
    write_json(
        os.path.join(config.out, "meta.json"),
        {
            "schema": CONFIG_SCHEMA,
            "assets": rp.asset_names,
            "n_returns": int(rp.returns.shape[0]),
            "split_index": int(s),
            "first_date": rp.dates[0].isoformat(),
            "last_date": rp.dates[-1].isoformat(),
        },
        provenance=config.provenance(),
    )


# ---------------------------------------------------------------------------
# fit

_FIT_CTX: dict = {}

# Fit order and nesting parents for the parametric menu: starting each fit
# from its parent's optimum keeps optimal likelihoods monotone across
# nested menu items.
_CHAIN = ("ic", "gc", "tc", "cic", "cgc", "ctc")
_PARENT = {"ic": None, "gc": "ic", "tc": None, "cic": "ic", "cgc": "gc", "ctc": "tc"}


def _required_items(menu) -> list:
    needed = set()

    def add(item):
        if item is None or item in needed:
            return
        needed.add(item)
        add(_PARENT[item])

    for item in menu:
        add(item)
    return [item for item in _CHAIN if item in needed]


def _init_fit_worker(ctx):
    global _FIT_CTX
    _FIT_CTX = ctx


def _fit_method_chain(method_tag):
    """Fit every required menu item for one decomposition's residuals."""
    ctx = _FIT_CTX
    data = ctx["residuals"][method_tag]
    addin_target = np.eye(data.shape[1]) if method_tag != "nodcc" else None
    dcc = ctx["dcc"] if method_tag != "nodcc" else None
    method = DecompMethod(tag=method_tag, tau=ctx["tau"]) if method_tag != "nodcc" else None
    intervals = {
        pair: CorrInterval(**payload) for pair, payload in ctx["intervals"][method_tag].items()
    }
    fitted = {}
    rows = []
    for item in _required_items(ctx["menu"]):
        parent = _PARENT[item]
        result = fit_residual_model(
            data,
            item.upper(),
            addin_target=addin_target,
            marginal_starts=ctx["marginal_starts"][method_tag],
            nested_model=fitted.get(parent),
        )
        fitted[item] = result.model
        if item not in ctx["menu"]:
            continue
        llis = returns_loglik(
            ctx["garch"], dcc, method, result.model, ctx["returns"], ctx["split_index"], "in"
        )
        lloos = returns_loglik(
            ctx["garch"], dcc, method, result.model, ctx["returns"], ctx["split_index"], "out"
        )
        verdict = correlation_test(result.model, intervals)
        rows.append(
            {
                "method": method_tag,
                "menu_item": item.upper(),
                "ll": result.loglik,
                "k": result.k,
                "aic": result.aic,
                "bic": result.bic,
                "llis": llis,
                "lloos": lloos,
                "corr_test": verdict,
                "converged": result.converged,
                "clamp_count": result.clamp_count,
                "params": _model_params_dict(result.model),
            }
        )
    return rows


def _model_params_dict(model) -> dict:
    out = {
        "marginals": [{"nu": m.nu, "gamma": m.gamma} for m in model.marginals],
    }
    cop = model.copula
    if cop is None:
        out["copula"] = {"kind": "independent"}
    elif isinstance(cop, GaussianNd):
        out["copula"] = {"kind": "gaussian", "corr": cop.corr.tolist()}
    elif isinstance(cop, StudentTNd):
        out["copula"] = {"kind": "studentt", "corr": cop.corr.tolist(), "nu": cop.nu}
    elif isinstance(cop, PairCopula):
        out["copula"] = {
            "kind": "pair",
            "pivot": cop.pivot,
            "edges": [{"code": e.code, "params": list(e.params)} for e in cop.edge_copulas],
        }
    out["addin"] = model.addin.L.tolist() if model.addin is not None else None
    return out


def _map_tasks(worker, tasks, ctx, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        _init_fit_worker(ctx)
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(
        max_workers=jobs, initializer=_init_fit_worker, initargs=(ctx,)
    ) as pool:
        return list(pool.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def run_fit(config: PipelineConfig) -> None:
    """Three-stage estimation plus residual-distribution fits and reports."""
    ensure_dir(config.out)
    ensure_dir(os.path.join(config.out, "fits"))
    prov = config.provenance_line()
    panel = _load_panel(config)
    rp = log_returns(panel, config.split)
    returns = rp.returns
    T, N = returns.shape
    s = rp.split_index
    if s < 100:
        raise ConfigError(f"in-sample window too short for estimation ({s} rows)")
    assets = rp.asset_names

    # Stage 1: per-asset GARCH on the in-sample window.
    garch_params: list[GarchParams] = []
    garch_rows = []
    for i, asset in enumerate(assets):
        params, report = fit_garch(returns[:s, i])
        garch_params.append(params)
        garch_rows.append(
            {
                "asset": asset,
                "omega": params.omega,
                "alpha": params.alpha,
                "beta": params.beta,
                "sigma0": params.sigma0,
                "ll": report["ll"],
                "converged": report["converged"],
            }
        )
    write_json(os.path.join(config.out, "garch.json"), {"assets": garch_rows}, config.provenance())

    sigma = np.empty((T, N))
    for i in range(N):
        sigma[:, i] = filter_variance(garch_params[i], returns[:, i]).sigma
    xi = returns / sigma

    # Stage 2: DCC on the in-sample standardized residuals.
    dcc_params, dcc_report = fit_dcc(xi[:s])
    write_json(
        os.path.join(config.out, "dcc.json"),
        {
            "a": dcc_params.a,
            "b": dcc_params.b,
            "q_bar": dcc_params.q_bar.flatten().tolist(),
            "ll": dcc_report["ll"],
            "converged": dcc_report["converged"],
        },
        config.provenance(),
    )
    path = filter_dcc(dcc_params, xi)
    write_csv(
        os.path.join(config.out, "rt_path.csv"),
        ["t", "i", "j", "value"],
        [
            [t, i, j, repr(float(path.r[t, i, j]))]
            for t in range(T)
            for i in range(N)
            for j in range(i, N)
        ],
        provenance=prov,
    )

    # Stage 3 inputs: decomposed residuals per method (full sample).
    methods = [m for m in config.decomp if m != "nodcc"]
    residuals = {"nodcc": xi}
    for tag in methods:
        method = _decomp_method(tag, config, sigma)
        factors = decompose_path(method, path.r)
        residuals[tag] = np.linalg.solve(factors, xi[:, :, None])[:, :, 0]

    header = ["date", "window"]
    header += [f"xi_{a}" for a in assets]
    for tag in methods:
        header += [f"eps_{tag}_{a}" for a in assets]
    rows = []
    for t in range(T):
        row = [rp.dates[t].isoformat(), "in" if t < s else "out"]
        row += [repr(float(v)) for v in xi[t]]
        for tag in methods:
            row += [repr(float(v)) for v in residuals[tag][t]]
        rows.append(row)
    write_csv(os.path.join(config.out, "residuals.csv"), header, rows, provenance=prov)

    # Bootstrap intervals of the in-sample residual correlations.
    intervals: dict = {}
    for mi, tag in enumerate(config.decomp):
        per_method = {}
        for pi, (i, j) in enumerate(_pair_indices(N)):
            ci = bootstrap_corr_ci(
                residuals[tag][:s][:, (i, j)],
                resamples=config.resamples,
                seed=_interval_seed(config.seed, mi, pi),
            )
            per_method[f"{i}-{j}"] = {
                "point": ci.point,
                "lower": ci.lower,
                "upper": ci.upper,
                "resamples": ci.resamples,
            }
        intervals[tag] = per_method
    write_json(os.path.join(config.out, "intervals.json"), {"methods": intervals}, config.provenance())

    # Residual-distribution fits for the parametric menu.
    menu = [m for m in config.menu if m in PARAMETRIC_MENU]
    unknown = [m for m in config.menu if m not in PARAMETRIC_MENU]
    if unknown:
        raise ConfigError(
            f"menu items {unknown} are not parametric; run the sweep command for pc/cpc"
        )
    marginal_starts = {
        tag: _fit_marginals_independent(residuals[tag][:s]) for tag in config.decomp
    }
    ctx = {
        "residuals": {tag: residuals[tag][:s] for tag in config.decomp},
        "marginal_starts": marginal_starts,
        "menu": menu,
        "garch": garch_params,
        "dcc": dcc_params,
        "tau": config.tau,
        "returns": returns,
        "split_index": s,
        "intervals": {tag: {_key_to_pair(k): v for k, v in per.items()} for tag, per in intervals.items()},
    }
    per_method = _map_tasks(_fit_method_chain, list(config.decomp), ctx, config.jobs)
    results = [row for rows in per_method for row in rows]

    report_rows = []
    for res in results:
        write_json(
            os.path.join(config.out, "fits", f"{res['method']}_{res['menu_item'].lower()}.json"),
            {
                "menu_item": res["menu_item"],
                "method": res["method"],
                "spec_string": None,
                "params": res["params"],
                "ll": res["ll"],
                "k": res["k"],
                "aic": res["aic"],
                "bic": res["bic"],
                "llis": res["llis"],
                "lloos": res["lloos"],
                "corr_test": res["corr_test"],
                "converged": res["converged"],
                "clamp_count": res["clamp_count"],
            },
            config.provenance(),
        )
        report_rows.append(
            [
                res["method"],
                res["menu_item"],
                repr(res["aic"]),
                repr(res["bic"]),
                repr(res["llis"]),
                repr(res["lloos"]),
                str(res["menu_item"].startswith("C")).lower(),
                res["corr_test"],
            ]
        )
    write_csv(
        os.path.join(config.out, "report.csv"),
        ["method", "type", "aic", "bic", "llis", "lloos", "addin_used", "corr_test"],
        report_rows,
        provenance=prov,
    )
    write_json(
        os.path.join(config.out, "meta.json"),
        {
            "schema": CONFIG_SCHEMA,
            "assets": assets,
            "n_returns": int(T),
            "split_index": int(s),
            "first_date": rp.dates[0].isoformat(),
            "last_date": rp.dates[-1].isoformat(),
        },
        config.provenance(),
    )


def _key_to_pair(key: str) -> tuple:
    i, j = key.split("-")
    return (int(i), int(j))


# ---------------------------------------------------------------------------
# sweep

_SWEEP_CTX: dict = {}


def _init_sweep_worker(ctx):
    global _SWEEP_CTX
    _SWEEP_CTX = ctx


def _sweep_one(task):
    idx, code = task
    ctx = _SWEEP_CTX
    template = parse_spec_code(code)
    base = {
        "idx": idx,
        "spec": code,
        "method": ctx["method_tag"],
        "menu_item": ctx["item"],
    }
    try:
        result = fit_residual_model(
            ctx["data"],
            ctx["item"],
            spec_template=template,
            addin_target=ctx["addin_target"],
            marginal_starts=ctx["marginal_starts"],
            maxiter=ctx["maxiter"],
            fatol=1e-6,
            restarts=1,
        )
        dcc = ctx["dcc"]
        method = (
            DecompMethod(tag=ctx["method_tag"], tau=ctx["tau"])
            if ctx["method_tag"] != "nodcc"
            else None
        )
        llis = returns_loglik(
            ctx["garch"], dcc, method, result.model, ctx["returns"], ctx["split_index"], "in"
        )
        lloos = returns_loglik(
            ctx["garch"], dcc, method, result.model, ctx["returns"], ctx["split_index"], "out"
        )
        intervals = {pair: CorrInterval(**p) for pair, p in ctx["intervals"].items()}
        verdict = correlation_test(result.model, intervals)
        base.update(
            ll=result.loglik,
            k=result.k,
            aic=result.aic,
            bic=result.bic,
            llis=llis,
            lloos=lloos,
            corr_test=verdict,
            converged=result.converged,
            clamp_count=result.clamp_count,
            error="",
        )
    except (DccopulaError, np.linalg.LinAlgError) as exc:
        base.update(
            ll=float("nan"),
            k=0,
            aic=float("nan"),
            bic=float("nan"),
            llis=float("nan"),
            lloos=float("nan"),
            corr_test="F",
            converged=False,
            clamp_count=0,
            error=str(exc),
        )
    return base


def _load_fit_artifacts(config: PipelineConfig):
    out = config.out
    for name in ("garch.json", "dcc.json", "residuals.csv", "intervals.json", "meta.json"):
        if not os.path.exists(os.path.join(out, name)):
            raise ConfigError(f"missing artifact {name}; run the fit command first")
    with open(os.path.join(out, "meta.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    with open(os.path.join(out, "garch.json"), encoding="utf-8") as fh:
        garch_doc = json.load(fh)
    garch_params = [
        GarchParams(omega=row["omega"], alpha=row["alpha"], beta=row["beta"], sigma0=row["sigma0"])
        for row in garch_doc["assets"]
    ]
    with open(os.path.join(out, "dcc.json"), encoding="utf-8") as fh:
        dcc_doc = json.load(fh)
    n = len(garch_params)
    dcc_params = DccParams(
        a=dcc_doc["a"], b=dcc_doc["b"], q_bar=np.array(dcc_doc["q_bar"]).reshape(n, n)
    )
    with open(os.path.join(out, "intervals.json"), encoding="utf-8") as fh:
        intervals_doc = json.load(fh)["methods"]
    header, rows = read_csv_rows(os.path.join(out, "residuals.csv"))
    table = {name: i for i, name in enumerate(header)}
    assets = meta["assets"]
    residual_cols: dict = {}
    for tag in ALL_METHODS:
        names = (
            [f"xi_{a}" for a in assets] if tag == "nodcc" else [f"eps_{tag}_{a}" for a in assets]
        )
        if all(nm in table for nm in names):
            residual_cols[tag] = np.array(
                [[float(r[table[nm]]) for nm in names] for r in rows]
            )
    return meta, garch_params, dcc_params, intervals_doc, residual_cols


def run_sweep(config: PipelineConfig) -> None:
    """Enumerate pair-copula specs for one decomposition and fit them all."""
    items = [m for m in config.menu if m in SWEEP_MENU]
    if len(items) != 1:
        raise ConfigError("sweep needs exactly one menu item: pc or cpc")
    item = items[0].upper()
    if len(config.decomp) != 1:
        raise ConfigError("sweep needs exactly one decomposition (or nodcc)")
    method_tag = config.decomp[0]

    meta, garch_params, dcc_params, intervals_doc, residual_cols = _load_fit_artifacts(config)
    if method_tag not in residual_cols:
        raise ConfigError(f"residuals for {method_tag!r} not in artifacts; refit with it enabled")
    if method_tag not in intervals_doc:
        raise ConfigError(f"intervals for {method_tag!r} not in artifacts; refit with it enabled")
    s = meta["split_index"]
    data = residual_cols[method_tag][:s]
    if data.shape[1] != 3:
        raise ConfigError("the pair-copula sweep requires exactly three assets")

    # Returns are reconstructible from the stored residuals and parameters,
    # but the source data is cheaper to re-derive through ingestion.
    panel = _load_panel(config)
    rp = log_returns(panel, config.split)

    if config.families:
        templates = enumerate_specs(tuple(config.families), config.pivots)
    else:
        templates = enumerate_specs(pivots=config.pivots)

    marginal_starts = _fit_marginals_independent(data)
    ctx = {
        "data": data,
        "item": item,
        "method_tag": method_tag,
        "tau": config.tau,
        "addin_target": np.eye(3) if method_tag != "nodcc" else None,
        "marginal_starts": marginal_starts,
        "garch": garch_params,
        "dcc": dcc_params if method_tag != "nodcc" else None,
        "returns": rp.returns,
        "split_index": s,
        "intervals": {_key_to_pair(k): v for k, v in intervals_doc[method_tag].items()},
        "maxiter": config.sweep_maxiter,
    }
    tasks = [(i, t.code) for i, t in enumerate(templates)]
    results = _map_tasks_sweep(tasks, ctx, config.jobs)
    results.sort(key=lambda r: r["idx"])

    failures = [r for r in results if r["error"]]
    for r in failures:
        print(f"sweep: spec {r['spec']} failed: {r['error']}", file=sys.stderr)

    out_path = os.path.join(config.out, "sweep_report.csv")
    write_csv(
        out_path,
        [
            "spec",
            "method",
            "menu_item",
            "ll",
            "k",
            "aic",
            "bic",
            "llis",
            "lloos",
            "corr_test",
            "converged",
            "clamp_count",
        ],
        [
            [
                r["spec"],
                r["method"],
                r["menu_item"],
                repr(r["ll"]),
                r["k"],
                repr(r["aic"]),
                repr(r["bic"]),
                repr(r["llis"]),
                repr(r["lloos"]),
                r["corr_test"],
                str(r["converged"]).lower(),
                r["clamp_count"],
            ]
            for r in results
        ],
        provenance=config.provenance_line(),
    )
    ok = [r for r in results if not r["error"]]
    if ok:
        best_aic = min(ok, key=lambda r: r["aic"])
        best_bic = min(ok, key=lambda r: r["bic"])
        best_llis = max(ok, key=lambda r: r["llis"])
        append_csv_comments(
            out_path,
            [
                f"best_aic,{best_aic['spec']},{best_aic['aic']!r}",
                f"best_bic,{best_bic['spec']},{best_bic['bic']!r}",
                f"best_llis,{best_llis['spec']},{best_llis['llis']!r}",
            ],
        )


def _map_tasks_sweep(tasks, ctx, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        _init_sweep_worker(ctx)
        return [_sweep_one(t) for t in tasks]
    with ProcessPoolExecutor(
        max_workers=jobs, initializer=_init_sweep_worker, initargs=(ctx,)
    ) as pool:
        return list(pool.map(_sweep_one, tasks, chunksize=8))


# ---------------------------------------------------------------------------
# report


def run_report(config: PipelineConfig) -> None:
    """Assemble plot-ready tables (and figures) from fit/sweep artifacts."""
    out = config.out
    for name in ("report.csv", "intervals.json", "residuals.csv", "meta.json"):
        if not os.path.exists(os.path.join(out, name)):
            raise ConfigError(f"missing artifact {name}; run the fit command first")
    prov = config.provenance_line()
    with open(os.path.join(out, "meta.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    with open(os.path.join(out, "intervals.json"), encoding="utf-8") as fh:
        intervals_doc = json.load(fh)["methods"]
    s = meta["split_index"]
    assets = meta["assets"]
    n = len(assets)

    interval_rows = []
    for tag, per in intervals_doc.items():
        for key, payload in per.items():
            i, j = _key_to_pair(key)
            interval_rows.append(
                {
                    "pair": f"{i + 1}-{j + 1}",
                    "method": tag,
                    "point": payload["point"],
                    "lower": payload["lower"],
                    "upper": payload["upper"],
                }
            )
    write_csv(
        os.path.join(out, "corr_intervals.csv"),
        ["pair", "method", "point", "lower", "upper"],
        [
            [r["pair"], r["method"], repr(r["point"]), repr(r["lower"]), repr(r["upper"])]
            for r in interval_rows
        ],
        provenance=prov,
    )

    header, rows = read_csv_rows(os.path.join(out, "residuals.csv"))
    table = {name: i for i, name in enumerate(header)}
    methods_present = ["nodcc"] + [
        tag for tag in METHODS if all(f"eps_{tag}_{a}" in table for a in assets)
    ]
    cok_rows = []
    for i, j in _pair_indices(n):
        row = [f"{config.group_label}-{i + 1}{j + 1}"]
        for tag in methods_present:
            names = (
                [f"xi_{assets[i]}", f"xi_{assets[j]}"]
                if tag == "nodcc"
                else [f"eps_{tag}_{assets[i]}", f"eps_{tag}_{assets[j]}"]
            )
            x = np.array([float(r[table[names[0]]]) for r in rows[:s]])
            y = np.array([float(r[table[names[1]]]) for r in rows[:s]])
            row.append(repr(cokurtosis22(x, y)))
        cok_rows.append(row)
    write_csv(
        os.path.join(out, "cokurtosis.csv"),
        ["pair"] + methods_present,
        cok_rows,
        provenance=prov,
    )

    scatter_rows = []
    rep_header, rep_rows = read_csv_rows(os.path.join(out, "report.csv"))
    rcol = {name: i for i, name in enumerate(rep_header)}
    for r in rep_rows:
        scatter_rows.append(
            {
                "spec": r[rcol["type"]],
                "method": r[rcol["method"]],
                "llis": r[rcol["llis"]],
                "lloos": r[rcol["lloos"]],
                "corr_test": r[rcol["corr_test"]],
            }
        )
    sweep_path = os.path.join(out, "sweep_report.csv")
    if os.path.exists(sweep_path):
        sw_header, sw_rows = read_csv_rows(sweep_path)
        scol = {name: i for i, name in enumerate(sw_header)}
        for r in sw_rows:
            if r[scol["converged"]] != "true":
                continue
            scatter_rows.append(
                {
                    "spec": f"{r[scol['menu_item']]}:{r[scol['spec']]}",
                    "method": r[scol["method"]],
                    "llis": r[scol["llis"]],
                    "lloos": r[scol["lloos"]],
                    "corr_test": r[scol["corr_test"]],
                }
            )
    write_csv(
        os.path.join(out, "llis_lloos_scatter.csv"),
        ["spec", "method", "llis", "lloos", "corr_test"],
        [[r["spec"], r["method"], r["llis"], r["lloos"], r["corr_test"]] for r in scatter_rows],
        provenance=prov,
    )

    if config.figures:
        scatter_figure(scatter_rows, os.path.join(out, "llis_lloos_scatter.png"))
        intervals_figure(interval_rows, os.path.join(out, "corr_intervals.png"))
