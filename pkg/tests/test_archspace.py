"""
Tests for the hardware design space
"""
import itertools

import pytest

from estimator.archspace import (
    L2_PRESETS,
    TOPS_PRESETS,
    enumerate_space,
    hw_from_values,
    peak_tops,
    resolve_tops,
    space_size,
    validate_hw,
)
from estimator.models.hardware_models import KIB, MIB, ArchSpace, HardwareConfig, Platform
from tests.conftest import TestConfig


def _hw(tc, pe_x, pe_y, l2_kb=64, l2_bw=16, glb_mb=1) -> HardwareConfig:
    return HardwareConfig(
        tc=tc, pe_x=pe_x, pe_y=pe_y, l2_bytes=l2_kb * KIB, l2_bw=l2_bw, glb_bytes=glb_mb * MIB,
    )


class TestPeakTops:

    def test_examples(self, platform):
        assert peak_tops(_hw(1, 256, 8), platform) == pytest.approx(2.048)
        assert peak_tops(_hw(1, 1, 1), platform) == pytest.approx(1e-3)
        assert peak_tops(_hw(2, 256, 16), platform) == pytest.approx(8.192)

    def test_scales_with_clock(self):
        fast = Platform(freq_hz=1e9)
        assert peak_tops(_hw(1, 256, 8), fast) == pytest.approx(4.096)


class TestValidateHw:

    def test_valid_design(self, platform):
        hw = HardwareConfig.from_notation("2,256,16,128,32,2")
        assert validate_hw(hw, platform) == []

    def test_tops_budget_violation(self, platform):
        violations = validate_hw(_hw(4, 256, 64), platform)
        assert len(violations) == 1
        assert violations[0].startswith("TOPS")

    @pytest.mark.parametrize("hw, field", [
        (_hw(3, 16, 16), "tc"),
        (_hw(1, 24, 16), "pe_x"),
        (_hw(1, 16, 512), "pe_y"),
        (_hw(1, 16, 16, l2_kb=32), "l2_bytes"),
        (_hw(1, 16, 16, l2_kb=8192), "l2_bytes"),
        (_hw(1, 16, 16, glb_mb=16), "glb_bytes"),
        (_hw(1, 16, 16, l2_bw=512), "l2_bw"),
        (_hw(1, 16, 16, l2_bw=48), "l2_bw"),
    ])
    def test_range_violations_name_the_field(self, platform, hw, field):
        violations = validate_hw(hw, platform)
        assert len(violations) == 1
        assert violations[0].startswith("RANGE")
        assert field in violations[0]

    def test_table_l2_sizes_are_in_range(self, platform):
        for l2 in L2_PRESETS["table"]:
            hw = _hw(1, 16, 16).model_copy(update={"l2_bytes": l2})
            assert validate_hw(hw, platform) == []


class TestEnumerateSpace:

    def _small_space(self, budget: float = 20.0) -> ArchSpace:
        return ArchSpace(
            platform=Platform(tops_budget=budget),
            tc=(1, 2, 4), pe_x=(64, 128, 256), pe_y=(8, 16, 64),
            glb_bytes=(2 * MIB,), l2_bytes=(64 * KIB, 48 * KIB), l2_bw=(32,),
        )

    def test_yields_exactly_the_valid_members(self):
        space = self._small_space()
        expected = [
            hw_from_values(values) for values in itertools.product(*space.lists())
            if not validate_hw(hw_from_values(values), space.platform)
        ]
        members = list(enumerate_space(space))
        assert members == expected
        assert all(validate_hw(hw, space.platform) == [] for hw in members)
        assert all(hw.l2_bytes == 64 * KIB for hw in members)

    def test_budget_shrinks_the_space(self):
        for budget in TOPS_PRESETS.values():
            space = self._small_space(budget)
            assert all(peak_tops(hw, space.platform) <= budget for hw in enumerate_space(space))
        assert space_size(self._small_space(1.0)) < space_size(self._small_space(20.0))

    def test_chunks_cover_the_space(self):
        space = self._small_space()
        raw = space.raw_size()
        chunks = []
        for start in range(0, raw, 7):
            chunks.extend(enumerate_space(space, start, start + 7))
        assert chunks == list(enumerate_space(space))

    def test_desk_space(self, desk_config):
        assert space_size(desk_config.arch) == TestConfig.DESK_HARDWARE


class TestNotation:

    def test_parse_and_format(self):
        hw = HardwareConfig.from_notation("{1,256,8,64,128,2}")
        assert (hw.tc, hw.pe_x, hw.pe_y) == (1, 256, 8)
        assert hw.l2_bytes == 64 * KIB
        assert hw.glb_bytes == 2 * MIB
        assert hw.v_pe == 256
        assert hw.notation() == "1,256,8,64,128,2"

    def test_wrong_field_count(self):
        with pytest.raises(ValueError):
            HardwareConfig.from_notation("1,256,8")


class TestResolveTops:

    def test_presets_and_numbers(self):
        assert resolve_tops("20") == 20.0
        assert resolve_tops("1") == 1.0
        assert resolve_tops("0.5") == 0.5
        assert resolve_tops("custom", 2.5) == 2.5

    @pytest.mark.parametrize("flag, custom", [("custom", None), ("0", None), ("-4", None), ("lots", None)])
    def test_invalid(self, flag, custom):
        with pytest.raises(ValueError):
            resolve_tops(flag, custom)
