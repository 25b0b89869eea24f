"""Device power profiles: remaining-movement-time model, fitting and calibration.

The laptop battery (capacity C, Wh) feeds locomotion-side compute (P_loc, W)
and the devices running for ``hours_on`` (P_dev, W):

    remaining = max(0, (C - P_dev * hours_on) / P_loc)
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from app.models import Cell, Device, DevicePowerProfile, EnergyParams, ProfileSet

logger = logging.getLogger(__name__)

DEFAULT_CAPACITY_WH = 55.0
TABLE_HOURS = tuple(range(0, 11))


class FitError(ValueError):
    """Raised when the anchors do not determine the unknown powers."""


@dataclass(frozen=True)
class ProfileAnchor:
    """An observed (device, hours on, remaining movement hours) point."""

    device: Device
    hours_on: float
    remaining_hours: float


# Quoted heatmap values. The zero-hour row sits mid-band (3.41-3.86 h) and
# the 5G HAT is only known to stay above 3 h at the 10 h mark.
DEFAULT_ANCHORS: tuple[ProfileAnchor, ...] = (
    ProfileAnchor(Device.LIDAR, 0.0, 3.635),
    ProfileAnchor(Device.LIDAR, 10.0, 2.21),
    ProfileAnchor(Device.CAMERA, 10.0, 1.94),
    ProfileAnchor(Device.OBJECT_DETECTION, 8.0, 0.0),
    ProfileAnchor(Device.HAT5G, 10.0, 3.05),
)

# Measured USB draw per state, watts.
USB_POWER: dict[Device, tuple[float, float, float]] = {
    Device.DRIVERS: (0.1, 0.1, 0.1),
    Device.CAMERA: (1.0, 1.0, 1.4),
    Device.LIDAR: (1.25, 2.0, 2.0),
    Device.HAT5G: (0.8, 0.8, 0.9),
    Device.OBJECT_DETECTION: (0.0, 0.0, 5.0),
}


@dataclass
class ProfileFit:
    capacity_wh: float | None
    locomotion_w: float | None
    device_power: dict[Device, float] = field(default_factory=dict)
    residual: float = 0.0


def remaining_movement_time(
    capacity: float, device_power: float, hours_on: float, locomotion_power: float
) -> float:
    """Hours of movement left after running a device for ``hours_on`` hours.

    Saturates at zero.
    """
    if locomotion_power <= 0:
        raise ValueError("locomotion_power must be positive")
    return max(0.0, (capacity - device_power * hours_on) / locomotion_power)


def fit_device_profiles(
    anchors: list[ProfileAnchor] | tuple[ProfileAnchor, ...] = DEFAULT_ANCHORS,
    capacity_wh: float | None = DEFAULT_CAPACITY_WH,
    locomotion_w: float | None = None,
) -> ProfileFit:
    """Least-squares fit of the remaining-time model to anchor points.

    Each anchor gives one linear equation ``P_dev*h + P_loc*R - C = 0``.
    A device power is unknown only if some anchor runs it for h > 0;
    ``capacity_wh``/``locomotion_w`` are unknowns when passed as None.
    A zero remaining time is taken as the exact depletion point.

    Args:
        anchors: Observed points.
        capacity_wh: Fixed battery capacity, or None to fit it.
        locomotion_w: Fixed locomotion power, or None to fit it.

    Returns:
        The fitted values and the residual norm.

    Raises:
        FitError: If the system is underdetermined.
    """
    devices = sorted({a.device for a in anchors if a.hours_on > 0}, key=lambda d: d.value)
    unknowns: list[str | Device] = []
    if capacity_wh is None:
        unknowns.append("capacity")
    if locomotion_w is None and any(a.remaining_hours > 0 for a in anchors):
        unknowns.append("locomotion")
    unknowns.extend(devices)
    col = {u: i for i, u in enumerate(unknowns)}

    A = np.zeros((len(anchors), len(unknowns)))
    rhs = np.zeros(len(anchors))
    for i, anchor in enumerate(anchors):
        if capacity_wh is None:
            A[i, col["capacity"]] = -1.0
        else:
            rhs[i] += capacity_wh
        if anchor.remaining_hours > 0:
            if locomotion_w is None:
                A[i, col["locomotion"]] = anchor.remaining_hours
            else:
                rhs[i] -= locomotion_w * anchor.remaining_hours
        if anchor.hours_on > 0:
            A[i, col[anchor.device]] = anchor.hours_on

    n = len(unknowns)
    rank = int(np.linalg.matrix_rank(A)) if n else 0
    if rank < n:
        raise FitError(
            f"underdetermined: {len(anchors)} anchors, {n} unknowns, rank {rank}"
        )

    solution = np.linalg.lstsq(A, rhs, rcond=None)[0] if n else np.zeros(0)
    residual = float(np.linalg.norm(A @ solution - rhs)) if len(anchors) else 0.0
    fit = ProfileFit(
        capacity_wh=capacity_wh if capacity_wh is not None else float(solution[col["capacity"]]),
        locomotion_w=(
            locomotion_w
            if locomotion_w is not None
            else (float(solution[col["locomotion"]]) if "locomotion" in col else None)
        ),
        device_power={d: float(solution[col[d]]) for d in devices},
        residual=residual,
    )
    logger.info(
        "Fitted profiles: C=%s Wh, P_loc=%s W, %s (residual %.3g)",
        fit.capacity_wh,
        fit.locomotion_w,
        {d.value: round(p, 4) for d, p in fit.device_power.items()},
        residual,
    )
    return fit


def profile_set_from_fit(fit: ProfileFit) -> ProfileSet:
    """Combine a fit with the measured USB draw into a storable profile set."""
    if fit.capacity_wh is None or fit.locomotion_w is None:
        raise FitError("fit lacks capacity or locomotion power")
    devices = {}
    for device, (idle, started, working) in USB_POWER.items():
        devices[device] = DevicePowerProfile(
            device=device,
            p_idle=idle,
            p_started=started,
            p_working=working,
            battery_w=fit.device_power.get(device),
        )
    return ProfileSet(
        capacity_wh=fit.capacity_wh,
        locomotion_w=fit.locomotion_w,
        devices=devices,
        residual=fit.residual,
    )


def load_profiles(path: str | Path) -> ProfileSet:
    return ProfileSet.model_validate_json(Path(path).read_text(encoding="utf-8"))


def save_profiles(profiles: ProfileSet, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(profiles.model_dump(mode="json"), indent=2) + "\n", encoding="utf-8")


def device_drain(profiles: ProfileSet, device: Device) -> float:
    """Battery drain of a running device: fitted if available, else USB working power."""
    profile = profiles.devices[device]
    return profile.battery_w if profile.battery_w is not None else profile.p_working


def remaining_time_table(
    profiles: ProfileSet, hours: tuple[int, ...] = TABLE_HOURS
) -> list[dict[str, float]]:
    """Remaining movement time per device for each hours-on value."""
    rows = []
    for h in hours:
        row: dict[str, float] = {"hours_on": float(h)}
        for device in Device:
            if device not in profiles.devices:
                continue
            row[device.value] = round(
                remaining_movement_time(
                    profiles.capacity_wh,
                    device_drain(profiles, device),
                    h,
                    profiles.locomotion_w,
                ),
                2,
            )
        rows.append(row)
    return rows


def calibrate_energy_params(
    profiles: ProfileSet,
    step_hours: float,
    base_station: Cell = (1, 1),
    kappa_fraction: float = 0.1,
) -> EnergyParams:
    """Per-step energy parameters (Wh per step) from a watt profile.

    Locomotion maps to P_move, the connected 5G HAT to P_RX, its working
    increment to P_TX (growing by ``kappa_fraction`` of that per cell from the
    base station), camera plus lidar to P_SEN, and on-robot detection minus
    the camera stream it consumes to P_local.
    """
    hat = profiles.devices[Device.HAT5G]
    sensing = device_drain(profiles, Device.CAMERA) + device_drain(profiles, Device.LIDAR)
    local = max(
        0.0,
        device_drain(profiles, Device.OBJECT_DETECTION) - device_drain(profiles, Device.CAMERA),
    )
    p_tx0 = (hat.p_working - hat.p_started) * step_hours
    return EnergyParams(
        p_rx=hat.p_started * step_hours,
        p_sen=sensing * step_hours,
        p_move_base=profiles.locomotion_w * step_hours,
        p_tx0=p_tx0,
        kappa=p_tx0 * kappa_fraction,
        gamma=1.0,
        base_station=base_station,
        p_local=local * step_hours,
    )


def load_anchors(path: str | Path) -> list[ProfileAnchor]:
    """Read ``[{"device": ..., "hours_on": ..., "remaining_hours": ...}, ...]``.

    Raises:
        FileNotFoundError: If the file does not exist.
        FitError: If an entry is malformed.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    try:
        return [
            ProfileAnchor(
                device=Device(item["device"]),
                hours_on=float(item["hours_on"]),
                remaining_hours=float(item["remaining_hours"]),
            )
            for item in json.loads(path.read_text(encoding="utf-8"))
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise FitError(f"invalid anchors in {path}: {e}") from e
