from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hems.domain import (
    APPLIANCES,
    ApplianceMismatchError,
    ApplianceSpec,
    BinarySchedule,
    DeadlineConstraint,
    DomainError,
    InfeasibleStartError,
    PriceCurve,
    SlotRangeError,
    schedule_filename,
    schedule_from_json,
    schedule_from_start,
    schedule_to_json,
    slot_to_time,
    time_to_slot,
    validate_schedule,
)


class TestSlotTime:
    def test_midnight(self):
        assert slot_to_time(0) == "00:00"

    def test_slot_14_is_0330(self):
        assert slot_to_time(14) == "03:30"

    def test_slot_26_is_0630(self):
        assert slot_to_time(26) == "06:30"

    def test_last_slot(self):
        assert slot_to_time(95) == "23:45"

    @pytest.mark.parametrize("bad", [-1, 96, 100])
    def test_out_of_range(self, bad):
        with pytest.raises(SlotRangeError):
            slot_to_time(bad)

    @given(st.integers(min_value=0, max_value=95))
    def test_round_trip(self, slot):
        assert time_to_slot(slot_to_time(slot)) == slot

    def test_injective(self):
        times = {slot_to_time(k) for k in range(96)}
        assert len(times) == 96


class TestPriceCurve:
    def test_requires_96_points(self):
        with pytest.raises(DomainError):
            PriceCurve(prices=tuple([1.0] * 95), market_date=date(2025, 10, 15))

    def test_rejects_nan(self):
        values = [1.0] * 96
        values[3] = float("nan")
        with pytest.raises(DomainError):
            PriceCurve(prices=tuple(values), market_date=date(2025, 10, 15))

    def test_accepts_negative_prices(self):
        values = [-50.0] * 96
        curve = PriceCurve(prices=tuple(values), market_date=date(2025, 10, 15))
        assert curve.prices[0] == -50.0


class TestApplianceSpec:
    def test_canonical_values(self):
        wm = APPLIANCES["washing_machine"]
        dw = APPLIANCES["dishwasher"]
        ev = APPLIANCES["ev_charger"]
        assert (wm.power_kw, wm.duration_slots, wm.max_start_slot) == (2.0, 8, 88)
        assert (dw.power_kw, dw.duration_slots, dw.max_start_slot) == (1.8, 6, 90)
        assert (ev.power_kw, ev.duration_slots, ev.max_start_slot) == (7.4, 24, 4)

    def test_completion_constraint(self):
        for spec in APPLIANCES.values():
            assert spec.max_start_slot + spec.duration_slots <= 96
        with pytest.raises(DomainError):
            ApplianceSpec("washing_machine", 2.0, 8, 89)


class TestScheduleFromStart:
    def test_constant_curve_cost(self, constant_curve):
        s = schedule_from_start(APPLIANCES["washing_machine"], 10, constant_curve)
        assert s.price_sum == pytest.approx(800.0)
        assert s.estimated_cost_eur == pytest.approx(0.40)

    def test_ev_start_5_infeasible(self, constant_curve):
        with pytest.raises(InfeasibleStartError) as err:
            schedule_from_start(APPLIANCES["ev_charger"], 5, constant_curve)
        assert "ev_charger" in str(err.value)
        assert "4" in str(err.value)

    def test_dw_on_fixture_matches_direct_indexing(self, figure2_curve):
        s = schedule_from_start(APPLIANCES["dishwasher"], 11, figure2_curve)
        assert [k for k, v in enumerate(s.states) if v == 1] == list(range(11, 17))
        # Independent oracle: direct indexing over the occupied slots.
        expected_sum = sum(figure2_curve.prices[k] for k in range(11, 17))
        assert s.price_sum == pytest.approx(expected_sum, abs=1e-9)
        assert s.price_sum == pytest.approx(340.95, abs=1e-9)
        assert s.estimated_cost_eur == pytest.approx(340.95 * 1.8 * 0.25 / 1000, abs=1e-12)

    @given(
        appliance_id=st.sampled_from(sorted(APPLIANCES)),
        start=st.integers(min_value=0, max_value=95),
        prices=st.lists(
            st.floats(min_value=-500, max_value=3000, allow_nan=False),
            min_size=96, max_size=96,
        ),
    )
    def test_states_form_an_interval(self, appliance_id, start, prices):
        spec = APPLIANCES[appliance_id]
        curve = PriceCurve(prices=tuple(prices), market_date=date(2025, 1, 1))
        if start > spec.max_start_slot:
            with pytest.raises(InfeasibleStartError):
                schedule_from_start(spec, start, curve)
            return
        s = schedule_from_start(spec, start, curve)
        on = [k for k, v in enumerate(s.states) if v == 1]
        assert sum(s.states) == spec.duration_slots
        assert on == list(range(start, start + spec.duration_slots))

    def test_cost_linear_in_power(self, figure2_curve):
        base = APPLIANCES["washing_machine"]
        doubled = ApplianceSpec("washing_machine", base.power_kw * 2, 8, 88)
        s1 = schedule_from_start(base, 20, figure2_curve)
        s2 = schedule_from_start(doubled, 20, figure2_curve)
        assert s2.estimated_cost_eur == pytest.approx(2 * s1.estimated_cost_eur)

    def test_cost_ignores_prices_outside_window(self, figure2_curve):
        spec = APPLIANCES["dishwasher"]
        baseline = schedule_from_start(spec, 40, figure2_curve)
        shuffled = list(figure2_curve.prices)
        shuffled[0], shuffled[95] = shuffled[95], shuffled[0]
        shuffled[10], shuffled[70] = shuffled[70], shuffled[10]
        other = PriceCurve(tuple(shuffled), figure2_curve.market_date)
        assert schedule_from_start(spec, 40, other).price_sum == pytest.approx(
            baseline.price_sum
        )


class TestValidateSchedule:
    def _ev(self, start, curve):
        return schedule_from_start(APPLIANCES["ev_charger"], start, curve)

    def test_ev_start_1_meets_slot_28(self, constant_curve):
        s = self._ev(1, constant_curve)
        d = DeadlineConstraint("ev_charger", finish_by_slot=28)
        assert validate_schedule(s, d) is True

    def test_ev_would_miss_deadline(self, constant_curve):
        s = BinarySchedule(
            appliance_id="ev_charger",
            states=tuple(1 if 5 <= k < 29 else 0 for k in range(96)),
            start_slot=5, duration_slots=24, price_sum=0.0, estimated_cost_eur=0.0,
        )
        assert validate_schedule(s, DeadlineConstraint("ev_charger", 28)) is False

    def test_wm_boundary_end_of_day(self, constant_curve):
        s = schedule_from_start(APPLIANCES["washing_machine"], 88, constant_curve)
        assert validate_schedule(s, DeadlineConstraint("washing_machine", 96)) is True

    def test_appliance_mismatch(self, constant_curve):
        s = self._ev(1, constant_curve)
        with pytest.raises(ApplianceMismatchError):
            validate_schedule(s, DeadlineConstraint("dishwasher", 28))


class TestSerialization:
    def test_round_trip(self, figure2_curve):
        s = schedule_from_start(APPLIANCES["washing_machine"], 10, figure2_curve, "cheap window")
        doc = schedule_to_json(s, figure2_curve.market_date)
        assert doc["market_date"] == "2025-10-15"
        assert doc["price_sum_eur_mwh"] == pytest.approx(467.95)
        assert len(doc["states"]) == 96
        assert schedule_from_json(doc) == s

    def test_filename(self):
        assert schedule_filename("run-1", "dishwasher") == "run-1_dishwasher.json"


class TestTimeToSlot:
    @pytest.mark.parametrize("bad", ["25:00", "10:07", "nonsense", "12", ""])
    def test_rejects_non_quarter_hours(self, bad):
        with pytest.raises(SlotRangeError):
            time_to_slot(bad)
