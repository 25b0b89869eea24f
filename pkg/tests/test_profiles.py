"""Tests for device profile fitting and calibration."""

import json

import pytest

from app.energy.profiles import (
    DEFAULT_ANCHORS,
    FitError,
    ProfileAnchor,
    calibrate_energy_params,
    fit_device_profiles,
    load_anchors,
    load_profiles,
    profile_set_from_fit,
    remaining_movement_time,
    remaining_time_table,
    save_profiles,
)
from app.models import Device

from tests.conftest import ROOT


@pytest.fixture
def fitted():
    return profile_set_from_fit(fit_device_profiles())


class TestRemainingMovementTime:
    def test_no_device_time(self):
        assert remaining_movement_time(55.0, 3.0, 0.0, 11.0) == pytest.approx(5.0)

    def test_saturates_at_zero(self):
        assert remaining_movement_time(55.0, 10.0, 8.0, 11.0) == 0.0

    def test_rejects_zero_locomotion(self):
        with pytest.raises(ValueError):
            remaining_movement_time(55.0, 1.0, 1.0, 0.0)


class TestFit:
    def test_detection_only_anchor(self):
        fit = fit_device_profiles(
            [ProfileAnchor(Device.OBJECT_DETECTION, 8.0, 0.0)], capacity_wh=55.0
        )
        assert fit.device_power[Device.OBJECT_DETECTION] == pytest.approx(6.875)
        assert fit.locomotion_w is None

    def test_camera_draws_more_than_lidar(self):
        fit = fit_device_profiles(
            [
                ProfileAnchor(Device.LIDAR, 0.0, 3.635),
                ProfileAnchor(Device.LIDAR, 10.0, 2.21),
                ProfileAnchor(Device.CAMERA, 10.0, 1.94),
            ]
        )
        assert fit.device_power[Device.CAMERA] > fit.device_power[Device.LIDAR]

    def test_underdetermined(self):
        with pytest.raises(FitError, match="underdetermined"):
            fit_device_profiles(
                [ProfileAnchor(Device.LIDAR, 10.0, 2.21)], capacity_wh=None, locomotion_w=None
            )

    def test_default_fit_values(self):
        fit = fit_device_profiles()
        assert fit.capacity_wh == 55.0
        assert fit.locomotion_w == pytest.approx(15.130674, abs=1e-5)
        assert fit.device_power[Device.LIDAR] == pytest.approx(2.156121, abs=1e-5)
        assert fit.device_power[Device.CAMERA] == pytest.approx(2.564649, abs=1e-5)
        assert fit.device_power[Device.HAT5G] == pytest.approx(0.885144, abs=1e-5)
        assert fit.residual == pytest.approx(0.0, abs=1e-9)


class TestRemainingTimeTable:
    def test_quoted_values(self, fitted):
        rows = {row["hours_on"]: row for row in remaining_time_table(fitted)}
        assert rows[10.0]["lidar"] == pytest.approx(2.21, abs=0.05)
        assert rows[10.0]["camera"] == pytest.approx(1.94, abs=0.05)
        assert rows[8.0]["object_detection"] == 0.0

    def test_zero_hour_band(self, fitted):
        first = remaining_time_table(fitted)[0]
        values = [v for k, v in first.items() if k != "hours_on"]
        assert all(3.41 <= v <= 3.86 for v in values)

    def test_eleven_rows(self, fitted):
        assert [row["hours_on"] for row in remaining_time_table(fitted)] == [float(h) for h in range(11)]


class TestProfileFiles:
    def test_shipped_profile_matches_fit(self, fitted):
        shipped = load_profiles(ROOT / "profiles" / "devices.json")
        assert shipped.locomotion_w == pytest.approx(fitted.locomotion_w, abs=1e-6)
        for device, profile in fitted.devices.items():
            assert shipped.devices[device].p_working == profile.p_working
            if profile.battery_w is not None:
                assert shipped.devices[device].battery_w == pytest.approx(profile.battery_w, abs=1e-6)

    def test_save_and_load(self, fitted, tmp_path):
        path = tmp_path / "nested" / "profiles.json"
        save_profiles(fitted, path)
        assert load_profiles(path) == fitted

    def test_load_anchors(self, tmp_path):
        path = tmp_path / "anchors.json"
        path.write_text(json.dumps([{"device": "lidar", "hours_on": 10, "remaining_hours": 2.21}]))
        assert load_anchors(path) == [ProfileAnchor(Device.LIDAR, 10.0, 2.21)]

    def test_bad_anchor(self, tmp_path):
        path = tmp_path / "anchors.json"
        path.write_text(json.dumps([{"device": "radar", "hours_on": 1, "remaining_hours": 1}]))
        with pytest.raises(FitError, match="invalid anchors"):
            load_anchors(path)


class TestCalibration:
    def test_step_units(self, fitted):
        params = calibrate_energy_params(fitted, step_hours=1 / 210)
        assert params.p_move_base == pytest.approx(0.0720508, abs=1e-6)
        assert params.p_rx == pytest.approx(0.8 / 210)
        assert params.p_tx0 == pytest.approx(0.1 / 210)
        assert params.kappa == pytest.approx(0.01 / 210)
        assert params.p_sen == pytest.approx(0.0224799, abs=1e-6)
        assert params.p_local == pytest.approx(0.0205255, abs=1e-6)

    def test_field_scenario_uses_calibrated_values(self, fitted, field_scenario):
        params = calibrate_energy_params(fitted, step_hours=1 / 210)
        energy = field_scenario.energy
        for name in ("p_rx", "p_sen", "p_move_base", "p_tx0", "kappa", "p_local"):
            assert getattr(energy, name) == pytest.approx(getattr(params, name), rel=1e-5)

    def test_default_anchor_count(self):
        assert len(DEFAULT_ANCHORS) == 5
