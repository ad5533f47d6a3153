"""Batch verification front-end.

Reads a manifest (JSON file or built-in corpus entry), samples
admissible points per manifold, runs the selected check suites and
writes a structured report:

    <name>.records.jsonl   one JSON record per check per point
    <name>.summary.json    counts, environment stamp, verdict
    <name>.summary.txt     human-readable digest

Identical manifest and seed produce byte-identical records and summary
(modulo the summary timestamp field).  Exit codes: 0 all checks agree
with expectations, 1 at least one check off-expectation, 2 manifest or
schema error.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field

import numpy as np
from jsonschema import Draft7Validator

from . import __version__
from . import corpus as corpus_mod
from . import geometry as geo
from . import geomap as gm
from . import roter
from . import warped as wp
from .curvops import (
    max_abs_residual,
    riemann_symmetry_residuals,
    scalar_residual,
    tensor_residual,
    trace_residual,
)

SUITES = ("geometry-symmetries", "theorem21", "warped-diagnostics", "geodesic", "all")

DEFAULT_TOLERANCES = {
    "strict": 1e-10,
    "geo": 1e-9,
    "identity": 1e-8,
    "compound": 1e-7,
    "smoke": 1e-4,
    "pinned": 1e-6,
}

OUT_ENV = "CURVCHECK_OUT"

_number = {"type": "number"}
_string = {"type": "string"}
_expr_matrix = {"type": "array", "items": {"type": "array", "items": _string}}
_conditions = {
    "type": "array",
    "items": {
        "type": "array",
        "minItems": 2,
        "maxItems": 2,
        "items": [_string, {"enum": ["positive", "nonzero"]}],
    },
}
_explicit_fields = {
    "coords": {"type": "array", "items": _string, "minItems": 1},
    "metric": _expr_matrix,
    "conditions": _conditions,
}
_expect_schema = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "classify": {"enum": ["EINSTEIN", "QUASI_EINSTEIN", "ROTER", "OTHER"]},
        "ricci_pseudosymmetric": {"type": "boolean"},
        "conformally_flat": {"type": "boolean"},
        "scalars": {"type": "object", "additionalProperties": _number},
        "pinned_scalars": {
            "type": "array",
            "items": {"type": "object", "additionalProperties": _number},
        },
        "fail_checks": {"type": "array", "items": _string},
    },
}
_manifold_schema = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "kind", "box"],
    "properties": {
        "name": _string,
        "kind": {"enum": ["explicit", "warped", "family", "pair2d"]},
        "box": {
            "type": "object",
            "additionalProperties": {
                "type": "array", "minItems": 2, "maxItems": 2, "items": _number
            },
        },
        "pinned_points": {
            "type": "array",
            "items": {"type": "object", "additionalProperties": _number},
        },
        "constants": {"type": "object", "additionalProperties": _number},
        "suites": {"type": "array", "items": {"enum": list(SUITES)}},
        "expect": _expect_schema,
        "perturb": {
            "type": "object",
            "additionalProperties": False,
            "required": ["target", "epsilon"],
            "properties": {"target": {"enum": ["ricci"]}, "epsilon": _number},
        },
        **_explicit_fields,
        "base": {
            "type": "object",
            "additionalProperties": False,
            "properties": {**_explicit_fields, "constants": {"type": "object", "additionalProperties": _number}},
            "required": ["coords", "metric"],
        },
        "fiber": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dim": {"type": "integer", "minimum": 2},
                "scalar_curvature": _number,
                **_explicit_fields,
            },
        },
        "warp": _string,
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["c", "d", "c1", "c2"],
            "properties": {
                "c": _number, "d": _number, "c1": _number, "c2": _number,
                "b": _string,
                "fiber_dim": {"type": "integer", "minimum": 2},
                "fiber_scalar": _number,
                "map_scale": _number, "map_shift": _number,
                "allow_conformally_flat": {"type": "boolean"},
            },
        },
        "pair": {
            "type": "object",
            "additionalProperties": False,
            "required": ["a", "b", "map_scale", "map_shift"],
            "properties": {
                "a": _string, "b": _string,
                "map_scale": _number, "map_shift": _number,
            },
        },
    },
}
MANIFEST_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "manifolds"],
    "properties": {
        "name": _string,
        "description": _string,
        "seed": {"type": "integer", "minimum": 0},
        "points": {"type": "integer", "minimum": 1},
        "suites": {"type": "array", "items": {"enum": list(SUITES)}},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _number for k in DEFAULT_TOLERANCES},
        },
        "manifolds": {"type": "array", "minItems": 1, "items": _manifold_schema},
    },
}


class ManifestError(ValueError):
    pass


def load_manifest(source: str) -> dict:
    """Path to a JSON manifest, or a corpus name (corpus/ prefix allowed)."""
    if os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as err:
                raise ManifestError(f"manifest is not valid JSON: {err}") from None
    else:
        try:
            data = corpus_mod.corpus_get(source)
        except KeyError:
            raise ManifestError(
                f"{source!r} is neither a file nor a corpus entry; "
                f"known entries: {', '.join(corpus_mod.corpus_list())}"
            ) from None
    validate_manifest(data)
    return data


def validate_manifest(data: dict) -> None:
    errors = sorted(Draft7Validator(MANIFEST_SCHEMA).iter_errors(data), key=str)
    if errors:
        joined = "; ".join(
            f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}"
            for e in errors[:5]
        )
        raise ManifestError(f"manifest schema violation: {joined}")
    for mdef in data["manifolds"]:
        kind = mdef["kind"]
        needed = {
            "explicit": ("coords", "metric"),
            "warped": ("base", "fiber", "warp"),
            "family": ("params",),
            "pair2d": ("pair",),
        }[kind]
        for key in needed:
            if key not in mdef:
                raise ManifestError(f"manifold {mdef['name']!r}: kind {kind} needs {key!r}")
        for block in (mdef, mdef.get("base"), mdef.get("fiber")):
            if not block or "metric" not in block:
                continue
            n = len(block.get("coords", ()))
            rows = block["metric"]
            if len(rows) != n or any(len(r) != n for r in rows):
                raise ManifestError(
                    f"manifold {mdef['name']!r}: metric matrix must be {n}x{n}"
                )


# ---------------------------------------------------------------------------
# Runtime objects

@dataclass
class Target:
    """One metric under test within a manifold definition."""

    label: str  # "self" | "source" | "image"
    spec: geo.MetricSpec
    warped_spec: wp.WarpedSpec | None = None


@dataclass
class Job:
    name: str
    kind: str
    definition: dict
    targets: list[Target]
    family: gm.Family | None
    pair: gm.GeodesicPair2D | None
    box: dict
    pinned: list[dict]

    def sample_ok(self, point) -> bool:
        if self.family is not None:
            return self.family.admissible_sample(point)
        return all(geo.admissible(t.spec, point) for t in self.targets)


def _build_explicit(mdef) -> geo.MetricSpec:
    return geo.metric_spec(
        mdef["coords"],
        mdef["metric"],
        mdef.get("constants", {}),
        [(c, kind) for c, kind in mdef.get("conditions", [])],
    )


def _build_fiber(fdef, constants) -> geo.MetricSpec:
    if "dim" in fdef:
        return wp.constant_curvature_fiber(fdef["dim"], fdef.get("scalar_curvature", 0.0))
    return geo.metric_spec(
        fdef["coords"], fdef["metric"], constants,
        [(c, kind) for c, kind in fdef.get("conditions", [])],
    )


def build_job(mdef: dict) -> Job:
    kind = mdef["kind"]
    family = None
    pair = None
    if kind == "explicit":
        targets = [Target("self", _build_explicit(mdef))]
    elif kind == "warped":
        constants = mdef.get("constants", {})
        bdef = dict(mdef["base"])
        bdef.setdefault("constants", constants)
        base = _build_explicit(bdef)
        fiber = _build_fiber(mdef["fiber"], constants)
        ws = wp.assemble(base, fiber, mdef["warp"])
        targets = [Target("self", ws.product, ws)]
    elif kind == "family":
        params = dict(mdef["params"])
        family = gm.build_family(gm.FamilyConfig(**params))
        targets = [
            Target("source", family.source.product, family.source),
            Target("image", family.image.product, family.image),
        ]
    else:  # pair2d
        pdef = mdef["pair"]
        pair = gm.geodesic_pair_2d(
            pdef["a"], pdef["b"], pdef["map_scale"], pdef["map_shift"]
        )
        targets = [Target("source", pair.source), Target("image", pair.image)]
    return Job(
        mdef["name"], kind, mdef, targets, family, pair,
        mdef["box"], mdef.get("pinned_points", []),
    )


def sample_points(job: Job, count: int, rng) -> list[tuple[float, ...]]:
    coords = job.targets[0].spec.coords
    box = dict(job.box)
    for c in coords:
        box.setdefault(c, [-0.3, 0.3])  # default window for fiber coordinates
    points = []
    for pin in job.pinned:
        pt = tuple(float(pin.get(c, 0.0)) for c in coords)
        if not job.sample_ok(pt):
            raise ManifestError(f"pinned point {pin} of {job.name!r} is inadmissible")
        points.append(pt)
    tries = 0
    while len(points) < count + len(job.pinned):
        if tries > 1000 * count:
            raise ManifestError(f"cannot sample admissible points for {job.name!r}")
        tries += 1
        pt = tuple(float(rng.uniform(*box[c])) for c in coords)
        if job.sample_ok(pt):
            points.append(pt)
    return points


# ---------------------------------------------------------------------------
# Check emission

@dataclass
class Runner:
    tolerances: dict
    records: list = field(default_factory=list)
    fails: int = 0
    unexpected: int = 0

    def emit(self, job, target, index, point, suite, check, residual, tol_key,
             expect_fail=False, scalars=None):
        threshold = self.tolerances[tol_key]
        passed = bool(residual <= threshold)
        ok = passed != expect_fail
        rec = {
            "manifold": job.name,
            "target": target,
            "point_index": index,
            "point": [round(v, 12) for v in point],
            "suite": suite,
            "check": check,
            "residual": float(residual),
            "threshold": threshold,
            "pass": passed,
            "expect_fail": expect_fail,
            "ok": ok,
        }
        if scalars:
            rec["scalars"] = {k: _jsonable(v) for k, v in scalars.items()}
        self.records.append(rec)
        if not passed:
            self.fails += 1
        if not ok:
            self.unexpected += 1

    def emit_flag(self, job, target, index, point, suite, check, ok, detail=None):
        rec = {
            "manifold": job.name,
            "target": target,
            "point_index": index,
            "point": [round(v, 12) for v in point],
            "suite": suite,
            "check": check,
            "residual": 0.0 if ok else 1.0,
            "threshold": 0.5,
            "pass": bool(ok),
            "expect_fail": False,
            "ok": bool(ok),
        }
        if detail is not None:
            rec["detail"] = detail
        self.records.append(rec)
        if not ok:
            self.fails += 1
            self.unexpected += 1


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return float(v)
    return v


def run_geometry_suite(run: Runner, job: Job, target: Target, idx, point):
    suite = "geometry-symmetries"
    f = geo.frame(target.spec, point)
    n = f.dim
    emit = lambda check, res, tol: run.emit(job, target.label, idx, point, suite, check, res, tol)
    emit("metric_inverse", max_abs_residual(f.g @ f.ginv, np.eye(n)), "strict")
    emit("gamma_lower_symmetry", max_abs_residual(f.gamma, np.swapaxes(f.gamma, 1, 2)), "strict")
    for name, res in riemann_symmetry_residuals(f.riemann).items():
        emit(f"riemann_{name}", res, "geo")
    emit("ricci_symmetric", max_abs_residual(f.ricci, f.ricci.T), "geo")
    if n >= 4:
        emit("weyl_trace_free", trace_residual(f.weyl, f.ginv), "geo")
    nabla_g = geo.covariant_derivative_02(target.spec, target.spec.components, point)
    emit("nabla_g", float(np.max(np.abs(nabla_g))) / (float(np.max(np.abs(f.g))) + 1.0), "strict")
    if idx < 2:  # finite-differenced, so spot-check only
        emit("second_bianchi", geo.second_bianchi_residual(target.spec, point), "smoke")
    scalars = {"kappa": f.scalar}
    if n == 2:
        scalars["gauss"] = geo.gauss_curvature(target.spec, point)
        expected = job.definition.get("expect", {}).get("scalars", {})
        if "gauss" in expected:
            res = scalar_residual(scalars["gauss"], expected["gauss"])
            run.emit(job, target.label, idx, point, suite, "gauss_value", res, "geo")
    run.emit(job, target.label, idx, point, suite, "frame_scalars", 0.0, "strict",
             scalars=scalars)


def run_theorem21_suite(run: Runner, job: Job, target: Target, idx, point):
    suite = "theorem21"
    expect = job.definition.get("expect", {})
    f = geo.frame(target.spec, point)
    perturb = job.definition.get("perturb")
    c = roter.classify(f)
    scalars = {"classification": c.kind, "kappa": f.scalar,
               "in_US": roter.in_us(f), "in_UC": roter.in_uc(f), "in_UR": roter.in_ur(f)}
    want = expect.get("classify")
    if want:
        # Source and image members of a family share the expected kind.
        run.emit_flag(job, target.label, idx, point, suite, "classification",
                      c.kind == want, detail=c.kind)
    if c.kind == roter.ROTER:
        fit = c.fit
        scalars.update(phi=fit.phi, mu=fit.mu, eta=fit.eta, L_R=fit.L_R,
                       L_C=fit.L_C, L=fit.L, alpha1=fit.alpha1, alpha2=fit.alpha2)
        run.emit(job, target.label, idx, point, suite, "fit_residual",
                 fit.residual, "identity")
        for name, res in roter.identity_suite(f, fit).items():
            run.emit(job, target.label, idx, point, suite, name, res, "identity")
        measured = roter.pseudosymmetry_factors(f)
        run.emit(job, target.label, idx, point, suite, "lr_closed_vs_measured",
                 scalar_residual(fit.L_R, measured["L_R"].factor), "identity")
        run.emit(job, target.label, idx, point, suite, "lc_closed_vs_measured",
                 scalar_residual(fit.L_C, measured["L_C"].factor), "identity")
        run.emit(job, target.label, idx, point, suite, "l_closed_vs_measured",
                 scalar_residual(fit.L, measured["L"].factor), "identity")
        extra_alphas = ()
        if target.warped_spec is not None and target.warped_spec.base_dim == 2:
            d = wp.diagnostics(target.warped_spec, point)
            if d.mu1 is not None:
                extra_alphas = (d.mu1, d.mu2)
        run.emit_flag(job, target.label, idx, point, suite, "rank_shift_grid",
                      roter.rank_grid_exceeds_one(f, fit, extra=extra_alphas))
        expected_scalar = expect.get("scalars", {})
        key = "L_R" if target.label in ("self", "source") else "L_R_image"
        if key in expected_scalar:
            run.emit(job, target.label, idx, point, suite, "l_r_expected",
                     scalar_residual(fit.L_R, expected_scalar[key]), "identity")
        if perturb and perturb["target"] == "ricci":
            rng = np.random.default_rng(12345)
            noise = rng.normal(size=f.ricci.shape)
            bad = f.ricci + perturb["epsilon"] * 0.5 * (noise + noise.T)
            res = tensor_residual(bad @ f.ginv @ bad, fit.alpha1 * bad + fit.alpha2 * f.g)
            run.emit(job, target.label, idx, point, suite,
                     "ricci_square_affine_perturbed", res, "identity", expect_fail=True)
    if expect.get("ricci_pseudosymmetric"):
        rp = roter.ricci_pseudosymmetry(f)
        ok_res = rp.residual if rp.verdict != "vacuous" else 0.0
        run.emit(job, target.label, idx, point, suite, "ricci_pseudosymmetry",
                 ok_res, "identity")
        if rp.factor is not None:
            scalars["L_S"] = rp.factor
    if job.pinned and idx < len(job.pinned):
        pins = expect.get("pinned_scalars", [])
        if idx < len(pins):
            for key, want_v in pins[idx].items():
                have = scalars.get(key)
                ok = have is not None
                res = scalar_residual(have, want_v) if ok else 1.0
                run.emit(job, target.label, idx, point, suite,
                         f"pinned_{key}", res, "pinned")
    run.emit(job, target.label, idx, point, suite, "fit_scalars", 0.0, "strict",
             scalars=scalars)


def run_warped_suite(run: Runner, job: Job, target: Target, idx, point):
    suite = "warped-diagnostics"
    ws = target.warped_spec
    if ws is None:
        return
    emit = lambda check, res, tol: run.emit(job, target.label, idx, point, suite, check, res, tol)
    emit("product_christoffels", wp.verify_product_christoffels(ws, point), "strict")
    block_tols = {"riemann_zero": "geo", "ricci_mixed": "geo", "trace_t": "strict"}
    for name, res in wp.verify_curvature_blocks(ws, point).items():
        emit(name, res, block_tols.get(name, "identity"))
    d = wp.diagnostics(ws, point)
    scalars = {"warp": d.f_value, "tr_t": d.tr_t, "delta1": d.delta1,
               "base_scalar": d.base_scalar, "fiber_scalar": d.fiber_scalar}
    if ws.base_dim == 2 and ws.dim >= 4:
        for name, res in wp.verify_weyl_blocks(ws, point).items():
            emit(name, res, "identity")
        rho0, is_flat = wp.conformal_flatness_test(ws, point)
        scalars.update(rho0=rho0, rho1=d.rho1, rho2=d.rho2, rho3=d.rho3,
                       mu1=d.mu1, mu2=d.mu2)
        expect = job.definition.get("expect", {})
        if "conformally_flat" in expect:
            run.emit_flag(job, target.label, idx, point, suite, "conformally_flat",
                          is_flat == expect["conformally_flat"], detail=rho0)
    if job.kind == "family":
        emit("t_proportional", wp.t_proportionality_residual(ws, point), "geo")
        for name, res in wp.verify_proportional_blocks(ws, point).items():
            emit(name, res, "identity")
        cfg = job.family.cfg
        if target.label == "source":
            emit("trace_t_scaled_warp",
                 scalar_residual(d.tr_t, cfg.d * d.f_value), "identity")
    run.emit(job, target.label, idx, point, suite, "warp_scalars", 0.0, "strict",
             scalars=scalars)


def run_geodesic_suite(run: Runner, job: Job, idx, point, fits_log):
    suite = "geodesic"
    if job.kind == "pair2d":
        pair = job.pair
        src, img, psi = pair.source, pair.image, pair.psi
        emit = lambda check, res, tol: run.emit(job, "pair", idx, point, suite, check, res, tol)
        emit("geodesic_compatibility",
             gm.geodesic_compatibility_residual(src, img, psi, point), "geo")
        emit("christoffel_shift",
             gm.christoffel_shift_residual(src, img, psi, point), "geo")
        emit("ricci_shift", gm.ricci_shift_residual(src, img, psi, point), "identity")
        emit("psi_gradient", psi.gradient_residual(point), "strict")
        for name, res in gm.pair_christoffel_closed_forms(pair, point).items():
            emit(name, res, "geo")
        return
    if job.kind != "family":
        return
    fam = job.family
    src, img, psi = fam.source.product, fam.image.product, fam.psi
    emit = lambda check, res, tol: run.emit(job, "pair", idx, point, suite, check, res, tol)
    emit("geodesic_compatibility",
         gm.geodesic_compatibility_residual(src, img, psi, point), "geo")
    emit("christoffel_shift", gm.christoffel_shift_residual(src, img, psi, point), "geo")
    emit("ricci_shift", gm.ricci_shift_residual(src, img, psi, point), "identity")
    emit("psi_gradient", psi.gradient_residual(point), "strict")
    r4, r5 = gm.warp_compatibility_residuals(fam, point)
    emit("warp_scale_equation", r4, "geo")
    emit("warp_log_equation", r5, "geo")
    for name, res in gm.family_psi_closed_forms(fam, point).items():
        emit(name, res, "geo")
    for name, res in gm.family_image_ricci_forms(fam, point).items():
        emit(name, res, "identity")
    for name, res in gm.warp_profile_pde_residuals(fam, point).items():
        emit(name, res, "geo")
    kg, kg_bar = gm.base_gauss_values(fam, point)
    emit("base_gauss_source", scalar_residual(kg, fam.l_r_expected), "geo")
    emit("base_gauss_image", scalar_residual(kg_bar, fam.l_r_image_expected), "geo")
    expect_kind = job.definition.get("expect", {}).get("classify", "ROTER")
    if expect_kind == "ROTER":
        try:
            sfit = roter.fit_roter(geo.frame(src, point))
            ifit = roter.fit_roter(geo.frame(img, point))
        except roter.RoterFitError as err:
            run.emit_flag(job, "pair", idx, point, suite, "roter_fits",
                          False, detail=str(err))
            return
        fits_log.append((sfit.L_R, ifit.L_R))
        for name, res in gm.factor_relations(fam, point, sfit, ifit).items():
            emit(name, res, "identity")
        emit("psi_ricci_identity",
             gm.psi_ricci_identity_residual(fam, point, ifit), "compound")


def run_manifest(manifest: dict, suites=None, points=None, seed=None,
                 tol_scale: float = 1.0) -> tuple[list, dict]:
    """Execute the manifest; returns (records, summary)."""
    selected = set(suites or manifest.get("suites", ["all"]))
    if "all" in selected:
        selected = set(SUITES) - {"all"}
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(manifest.get("tolerances", {}))
    tol = {k: v * tol_scale for k, v in tol.items()}
    run = Runner(tolerances=tol)
    seed = manifest.get("seed", 0) if seed is None else seed
    count = manifest.get("points", 20) if points is None else points

    for m_index, mdef in enumerate(manifest["manifolds"]):
        job = build_job(mdef)
        rng = np.random.default_rng([seed, m_index])
        pts = sample_points(job, count, rng)
        m_suites = set(job.definition.get("suites", [])) or selected
        if "all" in m_suites:
            m_suites = set(SUITES) - {"all"}
        fits_log: list = []
        for idx, pt in enumerate(pts):
            if "geometry-symmetries" in m_suites:
                for target in job.targets:
                    run_geometry_suite(run, job, target, idx, pt)
            if "theorem21" in m_suites:
                for target in job.targets:
                    if target.spec.dim >= 2:
                        run_theorem21_suite(run, job, target, idx, pt)
            if "warped-diagnostics" in m_suites:
                for target in job.targets:
                    run_warped_suite(run, job, target, idx, pt)
            if "geodesic" in m_suites:
                run_geodesic_suite(run, job, idx, pt, fits_log)
        if job.kind == "family" and "geodesic" in m_suites:
            run.emit(job, "pair", -1, (), "geodesic", "profile_invariant",
                     gm.profile_invariant_residual(job.family.cfg), "strict")
            if fits_log:
                from .curvops import constancy_residual

                src_vals = [a for a, _ in fits_log]
                img_vals = [b for _, b in fits_log]
                run.emit(job, "pair", -1, (), "geodesic", "l_r_constancy_source",
                         constancy_residual(src_vals), "identity")
                run.emit(job, "pair", -1, (), "geodesic", "l_r_constancy_image",
                         constancy_residual(img_vals), "identity")

    run.records.sort(key=lambda r: (r["manifold"], r["target"], r["point_index"],
                                    r["suite"], r["check"]))
    summary = {
        "manifest": manifest["name"],
        "version": __version__,
        "seed": seed,
        "points": count,
        "suites": sorted(selected),
        "tolerances": tol,
        "conventions": {
            "residual_normalization": "sum-plus-one",
            "us_threshold": roter.US_THRESHOLD,
            "uc_threshold": roter.UC_THRESHOLD,
            "ur_threshold": roter.UR_THRESHOLD,
        },
        "counts": {
            "checks": len(run.records),
            "failed": run.fails,
            "off_expectation": run.unexpected,
        },
        "ok": run.unexpected == 0,
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": platform.system(),
        },
    }
    return run.records, summary


# ---------------------------------------------------------------------------
# Report files and entry point

def write_report(records, summary, out_dir: str) -> dict[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    name = summary["manifest"]
    paths = {
        "records": os.path.join(out_dir, f"{name}.records.jsonl"),
        "summary": os.path.join(out_dir, f"{name}.summary.json"),
        "text": os.path.join(out_dir, f"{name}.summary.txt"),
    }
    with open(paths["records"], "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    stamped = dict(summary)
    stamped["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    with open(paths["summary"], "w", encoding="utf-8") as fh:
        json.dump(stamped, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(paths["text"], "w", encoding="utf-8") as fh:
        fh.write(render_text_summary(records, summary))
    return paths


def render_text_summary(records, summary) -> str:
    lines = [
        f"manifest : {summary['manifest']}",
        f"seed     : {summary['seed']}   points: {summary['points']}",
        f"suites   : {', '.join(summary['suites'])}",
        f"checks   : {summary['counts']['checks']}"
        f"   failed: {summary['counts']['failed']}"
        f"   off-expectation: {summary['counts']['off_expectation']}",
        f"verdict  : {'OK' if summary['ok'] else 'FAIL'}",
        "",
    ]
    worst: dict[tuple, dict] = {}
    for rec in records:
        key = (rec["manifold"], rec["target"], rec["check"])
        prev = worst.get(key)
        if prev is None or rec["residual"] > prev["residual"]:
            worst[key] = rec
    lines.append(f"{'manifold':24} {'target':7} {'check':32} {'worst residual':>14}  status")
    for key in sorted(worst):
        rec = worst[key]
        status = "ok" if rec["ok"] else "OFF-EXPECTATION"
        if rec["expect_fail"]:
            status += " (expected-fail)"
        lines.append(
            f"{rec['manifold'][:24]:24} {rec['target']:7} {rec['check'][:32]:32} "
            f"{rec['residual']:14.3e}  {status}"
        )
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="curvcheck",
        description="Curvature identity verification harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a manifest or corpus entry")
    p_run.add_argument("manifest", help="manifest path or corpus name")
    p_run.add_argument("--suite", action="append", choices=SUITES, help="restrict suites")
    p_run.add_argument("--points", type=int, help="points per manifold")
    p_run.add_argument("--seed", type=int, help="sampling seed override")
    p_run.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./reports)")
    p_run.add_argument("--tol-scale", type=float, default=1.0,
                       help="multiply every tolerance by this factor")

    sub.add_parser("list", help="list corpus entries")

    p_desc = sub.add_parser("describe", help="print a corpus manifest")
    p_desc.add_argument("name")

    args = parser.parse_args(argv)

    if args.command == "list":
        for name in corpus_mod.corpus_list():
            print(name)
        return 0

    if args.command == "describe":
        try:
            entry = corpus_mod.corpus_get(args.name)
        except KeyError as err:
            print(err, file=sys.stderr)
            return 2
        print(json.dumps(entry, indent=2, sort_keys=True))
        return 0

    try:
        manifest = load_manifest(args.manifest)
    except ManifestError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    try:
        records, summary = run_manifest(
            manifest, suites=args.suite, points=args.points,
            seed=args.seed, tol_scale=args.tol_scale,
        )
    except (geo.GeometryError, ManifestError, roter.RoterFitError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    out_dir = args.out or os.environ.get(OUT_ENV) or "reports"
    paths = write_report(records, summary, out_dir)
    print(render_text_summary(records, summary))
    print(f"records : {paths['records']}")
    print(f"summary : {paths['summary']}")
    return 0 if summary["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
