import numpy as np
import pytest

from app.krg.kernels import (
    BlockKernel,
    ConstantKernel,
    LogisticDistanceKernel,
    ProductKernel,
    parse_kernel,
)

SPECS = [
    "constant:0.3",
    "block:0.8,0.1,0.1,0.8",
    "block:1.0,0.0,0.0,0.5|0.3",
    "product:0.2,0.6",
    "logistic:0.2,0.05",
]


@pytest.mark.parametrize("text", SPECS)
def test_spec_round_trip(text):
    kernel = parse_kernel(text)
    assert kernel.spec() == text
    assert parse_kernel(kernel.spec()) == kernel


@pytest.mark.parametrize("text", SPECS)
def test_kernels_are_symmetric_probabilities(text):
    parse_kernel(text).spot_check(np.random.default_rng(0), pairs=500)


def test_parse_is_lenient_about_spacing_and_case():
    assert parse_kernel(" Constant: 0.25 ") == ConstantKernel(0.25)


@pytest.mark.parametrize(
    "text, message",
    [
        ("constant:1.2", "probability"),
        ("constant:0.1,0.2", "one value"),
        ("block:0.8,0.2,0.1,0.8", "symmetric"),
        ("block:0.1,0.2,0.3", "m\\*m"),
        ("block:0.8,0.1,0.1,0.8|0.2,0.4", "breakpoints"),
        ("block:0.8,0.1,0.1,0.8|1.5", "inside"),
        ("product:0.5,0.6", "g\\(1\\)"),
        ("logistic:0.2,0", "positive"),
        ("logistic:0.2,x", "numbers"),
        ("gamma:1", "unknown kernel kind"),
        ("constant", "kind:parameters"),
    ],
)
def test_parse_rejects_bad_specs(text, message):
    with pytest.raises(ValueError, match=message):
        parse_kernel(text)


# ----- kernel families -----
def test_constant_kernel_broadcasts():
    values = ConstantKernel(0.4).matrix(np.linspace(0, 1, 3), np.linspace(0, 1, 5))
    assert values.shape == (3, 5)
    assert np.all(values == 0.4)
    assert ConstantKernel(0.4).is_constant


def test_block_kernel_with_breakpoints():
    kernel = BlockKernel([[1.0, 0.0], [0.0, 0.5]], breakpoints=[0.3])
    assert kernel.evaluate(0.1, 0.2) == 1.0
    assert kernel.evaluate(0.5, 0.9) == 0.5
    assert kernel.evaluate(0.3, 0.1) == 0.0
    np.testing.assert_allclose(kernel.weights, [0.3, 0.7])
    assert kernel.m == 2


def test_block_kernel_default_blocks_are_equal():
    kernel = parse_kernel("block:0.9,0.1,0.2,0.1,0.9,0.3,0.2,0.3,0.7")
    np.testing.assert_allclose(kernel.weights, [1 / 3, 1 / 3, 1 / 3])
    assert kernel.block_of([0.0, 0.4, 0.99]).tolist() == [0, 1, 2]


def test_block_kernel_constant_detection():
    assert parse_kernel("block:0.4,0.4,0.4,0.4").is_constant
    assert not parse_kernel("block:0.8,0.1,0.1,0.8").is_constant


def test_block_kernel_matrix_is_read_only():
    kernel = BlockKernel([[0.5, 0.2], [0.2, 0.5]])
    with pytest.raises(ValueError):
        kernel.B[0, 0] = 1.0


def test_product_kernel():
    kernel = ProductKernel(0.2, 0.6)
    assert kernel.evaluate(1.0, 0.0) == pytest.approx(0.8 * 0.2)
    assert kernel.power_mean(1) == pytest.approx(0.5)
    assert kernel.power_mean(2) == pytest.approx(0.28)
    assert ProductKernel(0.3, 0.0).is_constant
    assert ProductKernel(0.3, 0.0).power_mean(3) == pytest.approx(0.027)


def test_logistic_kernel_half_at_center():
    kernel = LogisticDistanceKernel(0.2, 0.05)
    assert kernel.evaluate(0.1, 0.3) == pytest.approx(0.5)
    assert kernel.evaluate(0.5, 0.5) > kernel.evaluate(0.0, 1.0)
    assert not kernel.has_closed_form


def test_kernels_hash_by_spec():
    assert len({parse_kernel("constant:0.3"), ConstantKernel(0.3), ConstantKernel(0.4)}) == 2
