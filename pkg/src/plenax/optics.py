"""Camera parameter types, micro lens cardinal points, and the focus solver.

All lengths are millimetres. Distances along the optical axis are positive
toward object space. The image distance b_u and the exit pupil distance d_ap
are measured from the micro lens array (MLA) plane toward the main lens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INFINITY = math.inf

# Fixed-point solver defaults. The mapping is strongly contracting for any
# focus distance much larger than the focal length, so 1000 iterations is
# far more than the handful actually needed.
_SOLVER_TOL_MM = 1e-9
_SOLVER_MAX_ITERATIONS = 1000


@dataclass(frozen=True)
class SensorSpec:
    """Image sensor behind the MLA.

    Attributes:
        pixel_pitch_mm: Pixel pitch p_p.
        micro_image_px: Pixels per micro image along one axis (M). Must be
            odd so a central pixel exists under each micro lens.
    """

    pixel_pitch_mm: float
    micro_image_px: int

    def __post_init__(self) -> None:
        if not self.pixel_pitch_mm > 0:
            raise ValueError(f"pixel_pitch_mm must be > 0, got {self.pixel_pitch_mm}")
        if self.micro_image_px < 3 or self.micro_image_px % 2 == 0:
            raise ValueError(
                f"micro_image_px must be odd and >= 3, got {self.micro_image_px}"
            )

    @property
    def half_span(self) -> int:
        """Largest viewpoint offset c = (M - 1) / 2."""
        return (self.micro_image_px - 1) // 2


@dataclass(frozen=True)
class MicroLensSpec:
    """Micro lens array geometry, optionally with the full lens prescription.

    Attributes:
        focal_length_mm: Micro lens focal length f_s.
        pitch_mm: Lens pitch p_m.
        count_h: Number of lenses along the horizontal axis (J). Must be odd
            so the central lens sits on the optical axis.
        count_v: Number of lenses along the vertical axis (H). May be even;
            the vertical axis needs no central lens.
        thickness_mm, refractive_index, radius_front_mm, radius_back_mm:
            Optional physical prescription. When all four are given, the
            cardinal points derived from them must agree with focal_length_mm
            within 1e-3 mm.
        principal_gap_mm: Separation of the lens's principal planes, derived
            from the prescription when one is supplied.
    """

    focal_length_mm: float
    pitch_mm: float
    count_h: int
    count_v: int
    thickness_mm: float | None = None
    refractive_index: float | None = None
    radius_front_mm: float | None = None
    radius_back_mm: float | None = None
    principal_gap_mm: float | None = None

    def __post_init__(self) -> None:
        if not self.focal_length_mm > 0:
            raise ValueError(f"focal_length_mm must be > 0, got {self.focal_length_mm}")
        if not self.pitch_mm > 0:
            raise ValueError(f"pitch_mm must be > 0, got {self.pitch_mm}")
        if self.count_h < 1 or self.count_h % 2 == 0:
            raise ValueError(f"count_h must be odd and >= 1, got {self.count_h}")
        if self.count_v < 1:
            raise ValueError(f"count_v must be >= 1, got {self.count_v}")
        prescription = (
            self.thickness_mm,
            self.refractive_index,
            self.radius_front_mm,
            self.radius_back_mm,
        )
        if any(v is not None for v in prescription):
            if any(v is None for v in prescription):
                raise ValueError(
                    "a lens prescription needs all of thickness_mm, "
                    "refractive_index, radius_front_mm, radius_back_mm"
                )
            derived_f, derived_gap = mla_cardinal_points(
                self.thickness_mm,
                self.refractive_index,
                self.radius_front_mm,
                self.radius_back_mm,
            )
            if abs(derived_f - self.focal_length_mm) > 1e-3:
                raise ValueError(
                    f"prescription yields focal length {derived_f:.6f} mm, "
                    f"disagreeing with focal_length_mm={self.focal_length_mm}"
                )
            if self.principal_gap_mm is None:
                object.__setattr__(self, "principal_gap_mm", derived_gap)


@dataclass(frozen=True)
class MainLensSpec:
    """Main (objective) lens cardinal data.

    Attributes:
        focal_length_mm: Focal length f_u.
        exit_pupil_inf_mm: MLA-to-exit-pupil distance when focused at
            infinity.
        principal_gap_mm: Signed separation of the object- and image-side
            principal planes. Negative when they are crossed.
        b_u_inf_mm: Image distance at infinity focus. Defaults to the focal
            length, where the infinity image forms.
        front_vertex_to_h1_mm: Optional distance from the lens's front vertex
            to the object-side principal plane. Needed only to express pupil
            positions relative to the physical front of the lens.
    """

    focal_length_mm: float
    exit_pupil_inf_mm: float
    principal_gap_mm: float
    b_u_inf_mm: float | None = None
    front_vertex_to_h1_mm: float | None = None

    def __post_init__(self) -> None:
        if not self.focal_length_mm > 0:
            raise ValueError(f"focal_length_mm must be > 0, got {self.focal_length_mm}")
        if not self.exit_pupil_inf_mm > 0:
            raise ValueError(
                f"exit_pupil_inf_mm must be > 0, got {self.exit_pupil_inf_mm}"
            )

    @property
    def image_distance_inf_mm(self) -> float:
        """Image distance at infinity focus (b_u_inf_mm or the focal length)."""
        return self.b_u_inf_mm if self.b_u_inf_mm is not None else self.focal_length_mm


@dataclass(frozen=True)
class FocusSetting:
    """Where the camera is focused.

    Attributes:
        d_f_mm: Distance from the MLA's front vertex to the focused object
            plane. Use math.inf for infinity focus.
    """

    d_f_mm: float

    def __post_init__(self) -> None:
        if not (self.d_f_mm > 0):
            raise ValueError(f"d_f_mm must be > 0 or infinite, got {self.d_f_mm}")

    @property
    def at_infinity(self) -> bool:
        return math.isinf(self.d_f_mm)


@dataclass(frozen=True)
class FocusState:
    """Quantities derived from a focus setting.

    Attributes:
        b_u_mm: Main lens image distance.
        d_ap_mm: MLA-to-exit-pupil distance at this focus.
        a_u_mm: Object distance from the object-side principal plane
            (math.inf at infinity focus).
    """

    b_u_mm: float
    d_ap_mm: float
    a_u_mm: float


@dataclass(frozen=True)
class CameraConfig:
    """Complete description of one plenoptic camera at one focus setting."""

    sensor: SensorSpec
    mla: MicroLensSpec
    main_lens: MainLensSpec
    focus: FocusSetting

    def __post_init__(self) -> None:
        if not self.focus.at_infinity:
            floor = self.main_lens.focal_length_mm + self.main_lens.principal_gap_mm
            if self.focus.d_f_mm <= floor:
                raise ValueError(
                    f"d_f_mm={self.focus.d_f_mm} is too close to focus: "
                    f"no real image distance exists below {floor:.4f} mm"
                )

    @property
    def image_width_px(self) -> int:
        """Raw sensor width K = J * M."""
        return self.mla.count_h * self.sensor.micro_image_px

    @property
    def image_height_px(self) -> int:
        """Raw sensor height L = H * M."""
        return self.mla.count_v * self.sensor.micro_image_px


def mla_cardinal_points(
    thickness_mm: float,
    refractive_index: float,
    radius_front_mm: float,
    radius_back_mm: float,
) -> tuple[float, float]:
    """Effective focal length and principal plane gap of a single lens.

    Composes two paraxial refractions separated by the reduced glass path.
    An infinite radius denotes a flat surface.

    Args:
        thickness_mm: Centre thickness.
        refractive_index: Glass index n, must be > 1.
        radius_front_mm: Signed front surface radius (positive bulging toward
            the object). Must be nonzero.
        radius_back_mm: Signed back surface radius, may be +/- infinity.

    Returns:
        (focal_length_mm, principal_gap_mm) where the gap is the axial
        distance from the object-side to the image-side principal plane.

    Raises:
        ValueError: Non-physical inputs or zero combined optical power.
    """
    if thickness_mm < 0:
        raise ValueError(f"thickness_mm must be >= 0, got {thickness_mm}")
    if refractive_index <= 1:
        raise ValueError(f"refractive_index must be > 1, got {refractive_index}")
    if radius_front_mm == 0 or radius_back_mm == 0:
        raise ValueError("surface radii must be nonzero")
    power_front = (
        (refractive_index - 1.0) / radius_front_mm
        if math.isfinite(radius_front_mm)
        else 0.0
    )
    power_back = (
        (1.0 - refractive_index) / radius_back_mm
        if math.isfinite(radius_back_mm)
        else 0.0
    )
    reduced_thickness = thickness_mm / refractive_index
    power = power_front + power_back - power_front * power_back * reduced_thickness
    if power == 0:
        raise ValueError("prescription has zero optical power and cannot focus")
    focal_length = 1.0 / power
    # Principal plane offsets from the respective vertices, standard
    # thick-lens relations in the reduced-angle convention.
    h1_from_front = focal_length * power_back * reduced_thickness
    h2_from_back = -focal_length * power_front * reduced_thickness
    principal_gap = (thickness_mm + h2_from_back) - h1_from_front
    return focal_length, principal_gap


def solve_image_distance(
    focal_length_mm: float,
    principal_gap_mm: float,
    d_f_mm: float,
    tol_mm: float = _SOLVER_TOL_MM,
    max_iterations: int = _SOLVER_MAX_ITERATIONS,
) -> float:
    """Image distance b_u for a lens focused at a given distance.

    The object distance is a_u = d_f - b_u - principal_gap, which depends on
    the sought b_u, so the thin lens equation is iterated as a fixed point
    starting from b_u = focal length. Infinity focus returns the focal
    length exactly.

    Args:
        focal_length_mm: Main lens focal length f_u.
        principal_gap_mm: Signed principal plane separation.
        d_f_mm: Focus distance from the MLA front vertex, may be math.inf.
        tol_mm: Convergence threshold on successive iterates.
        max_iterations: Iteration cap.

    Returns:
        The converged image distance in mm.

    Raises:
        ValueError: The setting cannot be focused (object distance falls to
            or below the focal length at some iterate, or no convergence).
    """
    if not focal_length_mm > 0:
        raise ValueError(f"focal_length_mm must be > 0, got {focal_length_mm}")
    if math.isinf(d_f_mm):
        return focal_length_mm
    b_u = focal_length_mm
    for _ in range(max_iterations):
        a_u = d_f_mm - b_u - principal_gap_mm
        if a_u <= focal_length_mm:
            raise ValueError(
                f"unfocusable setting: object distance {a_u:.4f} mm does not "
                f"exceed the focal length {focal_length_mm} mm"
            )
        b_next = 1.0 / (1.0 / focal_length_mm - 1.0 / a_u)
        if abs(b_next - b_u) < tol_mm:
            return b_next
        b_u = b_next
    raise ValueError(
        f"image distance iteration did not converge within {max_iterations} steps"
    )


def exit_pupil_at_focus(
    b_u_mm: float, b_u_inf_mm: float, exit_pupil_inf_mm: float
) -> float:
    """Exit pupil distance from the MLA at an arbitrary focus.

    The pupil rides with the image distance: b_u - d_ap is a lens-internal
    constant, fixed by the infinity-focus pair.

    Args:
        b_u_mm: Image distance at the focus of interest.
        b_u_inf_mm: Image distance at infinity focus.
        exit_pupil_inf_mm: Exit pupil distance at infinity focus.

    Returns:
        The exit pupil distance d_ap in mm.
    """
    if b_u_mm <= 0 or b_u_inf_mm <= 0 or exit_pupil_inf_mm <= 0:
        raise ValueError("exit_pupil_at_focus requires positive distances")
    return b_u_mm - (b_u_inf_mm - exit_pupil_inf_mm)


def derive_focus_state(config: CameraConfig) -> FocusState:
    """Solve the focus-dependent distances for a camera configuration."""
    lens = config.main_lens
    b_u = solve_image_distance(
        lens.focal_length_mm, lens.principal_gap_mm, config.focus.d_f_mm
    )
    d_ap = exit_pupil_at_focus(
        b_u, lens.image_distance_inf_mm, lens.exit_pupil_inf_mm
    )
    if config.focus.at_infinity:
        a_u = INFINITY
    else:
        a_u = config.focus.d_f_mm - b_u - lens.principal_gap_mm
    return FocusState(b_u_mm=b_u, d_ap_mm=d_ap, a_u_mm=a_u)
