"""Energy arithmetic, battery recursions and device profiles."""

from app.energy.battery import (
    AdjacencyError,
    BatteryBoundError,
    BatteryDepleted,
    BatteryOverflow,
    StepEnergy,
    battery_step_a,
    battery_step_b,
    battery_step_soa,
    p_move,
    transmit_power,
)
from app.energy.profiles import (
    FitError,
    ProfileAnchor,
    calibrate_energy_params,
    fit_device_profiles,
    remaining_movement_time,
)

__all__ = [
    "AdjacencyError",
    "BatteryBoundError",
    "BatteryDepleted",
    "BatteryOverflow",
    "FitError",
    "ProfileAnchor",
    "StepEnergy",
    "battery_step_a",
    "battery_step_b",
    "battery_step_soa",
    "calibrate_energy_params",
    "fit_device_profiles",
    "p_move",
    "remaining_movement_time",
    "transmit_power",
]
