"""Shipped camera fixtures and their factory reference values.

Every fixture is a complete camera description file bundled with the
package. The reference tables below hold the values each fixture must
reproduce: focus solutions, lenslet cardinal points, viewpoint baselines
and tilts, and triangulated distances for known disparities. They are the
data behind the verify command; each entry carries its own tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import raymodel
from .configio import load_config
from .optics import INFINITY, CameraConfig, derive_focus_state, mla_cardinal_points


def fixture_names() -> tuple[str, ...]:
    files = resources.files("plenax").joinpath("fixtures")
    return tuple(sorted(p.name[: -len(".cfg")] for p in files.iterdir() if p.name.endswith(".cfg")))


def fixture_path(name: str) -> Path:
    path = resources.files("plenax").joinpath("fixtures", f"{name}.cfg")
    if not path.is_file():
        known = ", ".join(fixture_names())
        raise KeyError(f"no fixture {name!r} (shipped: {known})")
    return Path(str(path))


def load_fixture(name: str) -> CameraConfig:
    return load_config(fixture_path(name))


@dataclass(frozen=True)
class ReferenceCheck:
    """One factory value: what to compute, what to expect, how closely."""

    label: str
    kind: str
    expected: float
    tolerance: float
    args: tuple = ()
    relative: bool = False


@dataclass(frozen=True)
class CheckOutcome:
    label: str
    expected: float
    got: float
    tolerance: float
    passed: bool
    note: str = ""


def _focus(b_u: float, d_ap: float) -> list[ReferenceCheck]:
    return [
        ReferenceCheck("image distance b_U", "image_distance", b_u, 5e-4),
        ReferenceCheck("exit pupil distance d_A'", "exit_pupil", d_ap, 5e-4),
    ]


def _mla(f_s: float) -> list[ReferenceCheck]:
    return [
        ReferenceCheck("lenslet focal length", "mla_focal", f_s, 1e-3),
        ReferenceCheck("lenslet principal plane gap", "mla_gap", 0.396, 1e-3),
    ]


def _pair(gap: int, b: float | None = None, phi_deg: float | None = None) -> list[ReferenceCheck]:
    checks = []
    if b is not None:
        checks.append(
            ReferenceCheck(f"baseline B_{gap}", "baseline", b, 5e-4, args=(gap,))
        )
    if phi_deg is not None:
        checks.append(
            ReferenceCheck(f"tilt Phi_{gap}", "tilt_deg", phi_deg, 5e-4, args=(gap,))
        )
    return checks


def _dist(dx: float, z: float, tolerance: float = 1e-4, relative: bool = True) -> ReferenceCheck:
    return ReferenceCheck(
        f"distance, gap 1, disparity {dx:g} px", "distance", z, tolerance,
        args=(1, dx), relative=relative,
    )


def _front_pupil(expected: float) -> ReferenceCheck:
    return ReferenceCheck(
        "front vertex to entrance pupil", "front_pupil", expected, 1e-6
    )


REFERENCE_VALUES: dict[str, tuple[ReferenceCheck, ...]] = {
    "f193_mla2_inf": tuple(
        _focus(193.2935, 111.0324) + _mla(2.75)
        + _pair(6, b=3.7956, phi_deg=0.0)
        + [_dist(1, 978.2150), _dist(2, 489.1075),
           _dist(0, INFINITY), _front_pupil(240.2113)]
    ),
    "f193_mla2_3m": tuple(
        _focus(207.3134, 125.0523) + _mla(2.75)
        + _pair(6, b=4.2748, phi_deg=0.0816)
        + [_dist(0, 3001.4530), _dist(1, 877.9068), _dist(2, 514.1456),
           _front_pupil(240.2113)]
    ),
    "f193_mla2_1p5m": tuple(
        _focus(225.8852, 143.6241) + _mla(2.75)
        + _pair(6, b=4.9097, phi_deg=0.1897)
        + [_dist(-1, 15770.8729, tolerance=2.0, relative=False),
           _dist(0, 1482.8768), _dist(1, 778.0154), _dist(2, 527.3487),
           _front_pupil(240.2113)]
    ),
    "f193_mla1_inf": tuple(
        _focus(193.2935, 111.0324) + _mla(1.25)
        + _pair(6, b=8.3503, phi_deg=0.0)
        + [_dist(1, 2152.0729), _dist(2, 1076.0365), _front_pupil(240.2113)]
    ),
    "f193_mla1_3m": tuple(
        _focus(207.3134, 125.0523) + _mla(1.25)
        + _pair(6, b=9.4047, phi_deg=0.1795)
        + [_dist(0, 3001.4530), _dist(1, 1429.6116), _dist(2, 938.2541),
           _front_pupil(240.2113)]
    ),
    "f193_mla1_1p5m": tuple(
        _focus(225.8852, 143.6241) + _mla(1.25)
        + _pair(6, b=10.8014, phi_deg=0.4173)
        + [_dist(-1, 2521.0686), _dist(0, 1482.8768), _dist(1, 1050.3402),
           _dist(2, 813.1535), _front_pupil(240.2113)]
    ),
    "f90_mla2_inf": tuple(
        _focus(90.4036, 85.1198) + _mla(2.75)
        + _pair(6, b=1.7752, phi_deg=0.0)
        + [_dist(1, 213.9790), _dist(2, 106.9895), _front_pupil(27.4627)]
    ),
    "f90_mla2_3m": tuple(
        _focus(93.3043, 88.0205) + _mla(2.75)
        + _pair(6, b=1.8357, phi_deg=0.0361)
        + [_dist(0, 2913.5460), _dist(1, 212.1505), _dist(2, 110.0831),
           _front_pupil(27.4627)]
    ),
    "f90_mla2_1p5m": tuple(
        _focus(96.6224, 91.3386) + _mla(2.75)
        + _pair(6, b=1.9049, phi_deg=0.0774)
        + [_dist(0, 1410.2257), _dist(1, 209.7424), _dist(2, 113.2965),
           _front_pupil(27.4627)]
    ),
    "f197_mla2_inf": tuple(
        _focus(197.1264, 100.5000) + _mla(2.75)
        + _pair(4, b=2.5806) + _pair(8, b=5.1611)
        + [_dist(0, INFINITY)]
    ),
    "f197_mla2_4m": tuple(
        _focus(208.3930, 111.7666) + _mla(2.75)
        + _pair(4, phi_deg=0.0429) + _pair(8, phi_deg=0.0857)
    ),
    "lytro_f6p45": (
        ReferenceCheck("baseline B_1", "baseline_rounded", 0.3612, 0.0, args=(1,)),
        ReferenceCheck("baseline B_8", "baseline_rounded", 2.8896, 0.0, args=(8,)),
    ),
    "lytro_f51p4": (
        ReferenceCheck("baseline B_1", "baseline_rounded", 2.8784, 0.0, args=(1,)),
        ReferenceCheck("baseline B_8", "baseline_rounded", 23.0272, 0.0, args=(8,)),
    ),
}


def _evaluate(check: ReferenceCheck, config: CameraConfig, state, array) -> CheckOutcome:
    note = ""
    if check.kind == "image_distance":
        got = state.b_u_mm
    elif check.kind == "exit_pupil":
        got = state.d_ap_mm
    elif check.kind == "mla_focal":
        if config.mla.thickness_mm is None:
            got = config.mla.focal_length_mm
        else:
            got, _ = mla_cardinal_points(
                config.mla.thickness_mm, config.mla.refractive_index,
                config.mla.radius_front_mm, config.mla.radius_back_mm,
            )
    elif check.kind == "mla_gap":
        if config.mla.principal_gap_mm is None:
            return CheckOutcome(
                check.label, check.expected, math.nan, check.tolerance,
                passed=True, note="skipped: no lens prescription to derive it from",
            )
        got = config.mla.principal_gap_mm
    elif check.kind in ("baseline", "baseline_rounded"):
        gap = check.args[0]
        got = raymodel.baseline(array, -(gap // 2), gap)
        if check.kind == "baseline_rounded":
            got = round(got, 4)
    elif check.kind == "tilt_deg":
        gap = check.args[0]
        got = math.degrees(raymodel.relative_tilt(array, -(gap // 2), gap))
    elif check.kind == "distance":
        gap, dx = check.args
        got = raymodel.triangulate(
            array, raymodel.TriangulationQuery(gap=gap, disparity_px=dx)
        )
    elif check.kind == "front_pupil":
        v1h1 = config.main_lens.front_vertex_to_h1_mm
        if v1h1 is None:
            return CheckOutcome(
                check.label, check.expected, math.nan, check.tolerance,
                passed=True, note="skipped: front vertex position not given",
            )
        got = raymodel.front_vertex_to_entrance_pupil(
            v1h1, raymodel.entrance_pupil_distance(state, config)
        )
    else:
        raise ValueError(f"unknown check kind {check.kind!r}")

    if math.isinf(check.expected):
        passed = math.isinf(got) and got > 0
    else:
        bound = check.tolerance * (abs(check.expected) if check.relative else 1.0)
        # Zero tolerance means match at the printed precision.
        passed = abs(got - check.expected) <= max(bound, 1e-12)
    return CheckOutcome(check.label, check.expected, got, check.tolerance, passed, note)


def run_factory_checks(name: str, config: CameraConfig | None = None) -> list[CheckOutcome]:
    """Evaluate a fixture's reference values against a camera.

    config defaults to the shipped fixture itself; passing a modified camera
    shows where it departs from the factory values.
    """
    if name not in REFERENCE_VALUES:
        known = ", ".join(sorted(REFERENCE_VALUES))
        raise KeyError(f"no reference values for {name!r} (known: {known})")
    if config is None:
        config = load_fixture(name)
    state = derive_focus_state(config)
    array = raymodel.build_virtual_camera_array(state, config)
    return [_evaluate(check, config, state, array) for check in REFERENCE_VALUES[name]]


def run_consistency_checks(config: CameraConfig) -> list[CheckOutcome]:
    """Cross-check the closed-form viewpoint model against the ray tracer.

    Both routes compute the entrance pupil distance, the viewpoint
    positions and tilts; they must agree to 1e-9 (relative, with an
    absolute floor for values at zero), and the traced ray intersections
    for one viewpoint must cluster within 1e-9 mm.
    """
    from . import oracle

    state = derive_focus_state(config)
    array = raymodel.build_virtual_camera_array(state, config)
    sim = oracle.simulate_virtual_cameras(config, state)
    tol = 1e-9

    def close(a, b):
        return abs(a - b) <= tol * max(1.0, abs(a), abs(b))

    z_a = raymodel.entrance_pupil_distance(state, config)
    outcomes = [
        CheckOutcome(
            "entrance pupil distance, traced vs closed form",
            z_a,
            sim.entrance_pupil_to_h1_mm,
            tol,
            close(z_a, sim.entrance_pupil_to_h1_mm),
        ),
        CheckOutcome(
            "ray intersection spread",
            0.0,
            sim.intersection_spread_mm,
            tol,
            sim.intersection_spread_mm < tol,
        ),
    ]
    c = config.sensor.half_span
    for i in range(-c, c + 1):
        outcomes.append(
            CheckOutcome(
                f"viewpoint position, i = {i:+d}",
                array.position(i),
                sim.positions_mm[c + i],
                tol,
                close(array.position(i), sim.positions_mm[c + i]),
            )
        )
        outcomes.append(
            CheckOutcome(
                f"viewpoint tilt, i = {i:+d}",
                array.tilt(i),
                sim.tilt_angles_rad[c + i],
                tol,
                close(array.tilt(i), sim.tilt_angles_rad[c + i]),
            )
        )
    return outcomes
