import numpy as np
import pytest
from scipy import stats
from scipy.stats import qmc

from qmcd.errors import BudgetExceededError, InvalidArgumentError, QmcdError, UnsupportedDimensionError
from qmcd.models.inference import SamplerKind, SamplerSpec
from qmcd.models.point_set import PointSet, SequenceFamily
from qmcd.services import direction_numbers
from qmcd.services.direction_numbers import DirectionNumberTable
from qmcd.services.qmc_points import (
    draw_points,
    halton,
    korobov_vector,
    lattice_generating_vector,
    pseudo_random,
    rank1_lattice,
    sobol,
    star_discrepancy_1d,
    star_discrepancy_lower_bound,
    van_der_corput,
)


def _elementary_counts(points: np.ndarray, a: int, b: int) -> np.ndarray:
    cells = np.floor(points[:, 0] * 2 ** a).astype(int) * 2 ** b + np.floor(points[:, 1] * 2 ** b).astype(int)
    return np.bincount(cells, minlength=2 ** (a + b))


# Test van der Corput points
def test_van_der_corput_base_two():
    np.testing.assert_array_equal(van_der_corput(4).points[:, 0], [0.0, 0.5, 0.25, 0.75])


def test_van_der_corput_base_three():
    np.testing.assert_allclose(van_der_corput(3, base=3).points[:, 0], [0.0, 1 / 3, 2 / 3], rtol=1e-15)


def test_van_der_corput_single_point_is_origin():
    ps = van_der_corput(1, base=7)
    assert ps.points.shape == (1, 1)
    assert ps.points[0, 0] == 0.0


def test_van_der_corput_rejects_base_below_two():
    with pytest.raises(InvalidArgumentError):
        van_der_corput(4, base=1)


# Test Sobol points
def test_sobol_unscrambled_matches_scipy():
    ours = sobol(16, 3).points
    reference = qmc.Sobol(d=3, scramble=False).random(16)
    np.testing.assert_array_equal(ours, reference)


def test_sobol_first_point_is_origin():
    ps = sobol(4, 5)
    np.testing.assert_array_equal(ps.points[0], np.zeros(5))
    assert not ps.randomized


def test_sobol_one_dimension_is_van_der_corput():
    # Gray-code order visits the same points in a different order
    np.testing.assert_array_equal(np.sort(sobol(8, 1).points[:, 0]), np.sort(van_der_corput(8).points[:, 0]))


def test_scrambled_sobol_is_a_net():
    m = 6
    points = sobol(2 ** m, 2, scramble_seed=7).points
    for a in range(m + 1):
        counts = _elementary_counts(points, a, m - a)
        assert np.all(counts == 1), f"elementary intervals 2^-{a} x 2^-{m - a} are not balanced"


def test_scrambled_sobol_deterministic_and_seed_dependent():
    first = sobol(64, 3, scramble_seed=11)
    again = sobol(64, 3, scramble_seed=11)
    other = sobol(64, 3, scramble_seed=12)
    np.testing.assert_array_equal(first.points, again.points)
    assert not np.array_equal(first.points, other.points)
    assert first.seed == 11 and first.randomized


def test_scrambled_sobol_point_is_uniform_across_seeds():
    values = np.array([sobol(8, 1, scramble_seed=seed).points[3, 0] for seed in range(300)])
    assert stats.kstest(values, "uniform").pvalue > 0.001


def test_sobol_gray_code_order():
    np.testing.assert_array_equal(sobol(4, 1).points[:, 0], [0.0, 0.5, 0.75, 0.25])


@pytest.mark.parametrize("scramble_seed", [None, 21])
def test_sobol_projections_are_stratified_up_to_eight_dimensions(scramble_seed):
    n = 2 ** 8
    points = sobol(n, 8, scramble_seed=scramble_seed).points
    for j in range(8):
        cells = np.floor(points[:, j] * n).astype(int)
        np.testing.assert_array_equal(np.sort(cells), np.arange(n), err_msg=f"coordinate {j}")


@pytest.mark.parametrize("family", [SequenceFamily.SOBOL, SequenceFamily.HALTON])
def test_scrambled_coordinates_pass_ks_test(family):
    ps = draw_points(SamplerSpec(kind=SamplerKind.RQMC, family=family), 2 ** 12, 5, 17)
    for j in range(5):
        assert stats.kstest(ps.points[:, j], "uniform").pvalue > 0.001, f"coordinate {j}"


def test_sobol_dimension_limit():
    table = DirectionNumberTable()
    with pytest.raises(UnsupportedDimensionError):
        sobol(4, table.max_dimension + 1)


def test_joe_kuo_file_roundtrip(tmp_path):
    bundled = DirectionNumberTable.read_scipy_bundle()[:5]
    path = tmp_path / "joe-kuo.txt"
    with open(path, "w", encoding="utf-8") as f:
        f.write("d       s       a       m_i\n")
        for dim, (degree, a, m) in enumerate(bundled, start=2):
            f.write(f"{dim} {degree} {a} {' '.join(str(v) for v in m)}\n")
    from_file = DirectionNumberTable(path)
    assert from_file.max_dimension == 6
    np.testing.assert_array_equal(from_file.direction_numbers(6), DirectionNumberTable().direction_numbers(6))


def test_missing_scipy_bundle_names_the_remedy(tmp_path, monkeypatch):
    monkeypatch.setattr(direction_numbers.resources, "files", lambda package: tmp_path)
    with pytest.raises(QmcdError, match="Joe-Kuo table"):
        DirectionNumberTable(tmp_path / "absent.txt")


# Test Halton points
def test_halton_unscrambled_values():
    points = halton(4, 2).points
    np.testing.assert_allclose(points[:, 0], [0.0, 0.5, 0.25, 0.75])
    np.testing.assert_allclose(points[:, 1], [0.0, 1 / 3, 2 / 3, 1 / 9])


def test_halton_scrambled_in_unit_cube_and_reproducible():
    ps = halton(200, 4, scramble_seed=3)
    assert np.all((ps.points >= 0) & (ps.points < 1))
    np.testing.assert_array_equal(ps.points, halton(200, 4, scramble_seed=3).points)
    assert not np.array_equal(ps.points, halton(200, 4, scramble_seed=4).points)


def test_halton_scrambled_marginal_uniform():
    values = np.array([halton(10, 2, scramble_seed=seed).points[5, 1] for seed in range(300)])
    assert stats.kstest(values, "uniform").pvalue > 0.001


def test_halton_first_points():
    np.testing.assert_allclose(halton(3, 2).points, [[0.0, 0.0], [0.5, 1 / 3], [0.25, 2 / 3]], rtol=1e-15)
    np.testing.assert_array_equal(halton(1, 5).points, np.zeros((1, 5)))


def test_halton_identity_permutations_match_unscrambled():
    identity = [np.arange(2), np.arange(3), np.arange(5)]
    np.testing.assert_array_equal(halton(50, 3, permutations=identity).points, halton(50, 3).points)


def test_halton_explicit_permutation():
    reversed_digits = [np.array([1, 0]), np.array([0, 2, 1])]
    points = halton(2, 2, permutations=reversed_digits).points
    # digit 0 maps to 1 at every position, so index 0 sits just below 1 in base 2
    assert points[0, 0] > 0.999


def test_halton_wrong_permutation_count():
    with pytest.raises(InvalidArgumentError):
        halton(4, 3, permutations=[np.arange(2)])


# Test lattices
def test_lattice_points_and_shift():
    points = rank1_lattice(8, 2, generating_vector=[1, 3]).points
    index = np.arange(8)
    np.testing.assert_allclose(points[:, 0], index / 8)
    np.testing.assert_allclose(points[:, 1], (3 * index % 8) / 8)

    shifted = rank1_lattice(8, 2, generating_vector=[1, 3], shift=[0.25, 0.9]).points
    np.testing.assert_allclose(shifted[:, 0], (index / 8 + 0.25) % 1.0)


def test_lattice_baker_transform():
    points = rank1_lattice(4, 1, generating_vector=[1], baker=True).points[:, 0]
    np.testing.assert_allclose(points, [0.0, 0.5, np.nextafter(1.0, 0.0), 0.5])


def test_lattice_small_examples():
    np.testing.assert_allclose(rank1_lattice(4, 1, generating_vector=[1]).points[:, 0], [0.0, 0.25, 0.5, 0.75])
    shifted = rank1_lattice(4, 1, generating_vector=[1], shift=[0.1]).points[:, 0]
    np.testing.assert_allclose(shifted, [0.1, 0.35, 0.6, 0.85], rtol=1e-14)
    np.testing.assert_allclose(
        rank1_lattice(5, 2, generating_vector=[1, 2]).points,
        [[0.0, 0.0], [0.2, 0.4], [0.4, 0.8], [0.6, 0.2], [0.8, 0.6]],
        rtol=1e-14,
    )


def test_korobov_vector():
    assert korobov_vector(8, 3, 3) == [1, 3, 1]


def test_default_lattice_vector_limits():
    assert lattice_generating_vector(1024, 3)[0] == 1
    with pytest.raises(UnsupportedDimensionError):
        lattice_generating_vector(1024, 11)


def test_lattice_needs_single_shift_source():
    with pytest.raises(InvalidArgumentError):
        rank1_lattice(8, 1, shift=[0.1], shift_seed=1)


# Test sampler dispatch and validation
def test_draw_points_dispatch():
    mc = draw_points(SamplerSpec(kind=SamplerKind.MC), 16, 2, 5)
    np.testing.assert_array_equal(mc.points, pseudo_random(16, 2, 5).points)
    rqmc = draw_points(SamplerSpec(kind=SamplerKind.RQMC, family=SequenceFamily.HALTON), 16, 2, 5)
    assert rqmc.family == SequenceFamily.HALTON and rqmc.seed == 5
    with pytest.raises(InvalidArgumentError):
        draw_points(SamplerSpec(kind=SamplerKind.RQMC, family=SequenceFamily.VAN_DER_CORPUT), 16, 1, 5)


def test_pseudo_random_means_within_clt_band():
    n = 10 ** 5
    ps = pseudo_random(n, 2, 2024)
    np.testing.assert_array_equal(ps.points, pseudo_random(n, 2, 2024).points)
    assert np.all(np.abs(ps.points.mean(axis=0) - 0.5) <= 3.0 / np.sqrt(12.0 * n))


def test_point_set_rejects_values_outside_unit_interval():
    with pytest.raises(ValueError):
        PointSet(points=np.array([[0.5], [1.0]]), family=SequenceFamily.PSEUDO_RANDOM)


def test_point_set_is_read_only():
    ps = sobol(4, 2)
    with pytest.raises(ValueError):
        ps.points[0, 0] = 0.5


def test_invalid_counts():
    with pytest.raises(InvalidArgumentError):
        sobol(0, 2)
    with pytest.raises(InvalidArgumentError):
        halton(4, 0)


# Test star discrepancy
def test_star_discrepancy_1d_van_der_corput():
    assert star_discrepancy_1d(van_der_corput(4)) == pytest.approx(0.25)


def test_star_discrepancy_lower_bound_exact_in_one_dimension():
    ps = pseudo_random(50, 1, 9)
    assert star_discrepancy_lower_bound(ps) == pytest.approx(star_discrepancy_1d(ps), abs=1e-15)


@pytest.mark.parametrize("s", [1, 2])
def test_star_discrepancy_sobol_beats_random(s):
    qmc_bound = star_discrepancy_lower_bound(sobol(256, s, scramble_seed=1))
    mc_bound = star_discrepancy_lower_bound(pseudo_random(256, s, 1))
    assert qmc_bound < mc_bound


def test_star_discrepancy_decays_with_n():
    small = star_discrepancy_lower_bound(sobol(32, 2))
    large = star_discrepancy_lower_bound(sobol(512, 2))
    assert large < small


def test_star_discrepancy_budget_returns_partial_result():
    with pytest.raises(BudgetExceededError) as excinfo:
        star_discrepancy_lower_bound(sobol(64, 2), budget=100)
    assert excinfo.value.is_partial
    assert excinfo.value.partial_result >= 0.0
    assert excinfo.value.budget == 100


def _fixed(rows) -> PointSet:
    return PointSet(points=np.asarray(rows, dtype=np.float64), family=SequenceFamily.PSEUDO_RANDOM)


def test_star_discrepancy_1d_examples():
    assert star_discrepancy_1d(_fixed([[0.5]])) == 0.5
    n = 10
    centered = _fixed(((2 * np.arange(1, n + 1) - 1) / (2 * n))[:, None])
    assert star_discrepancy_1d(centered) == pytest.approx(1 / (2 * n), abs=1e-15)
    assert star_discrepancy_1d(_fixed(np.zeros((6, 1)))) == 1.0


def test_star_discrepancy_1d_needs_one_dimension():
    with pytest.raises(InvalidArgumentError):
        star_discrepancy_1d(sobol(4, 2))


def test_star_discrepancy_single_point_in_square():
    assert star_discrepancy_lower_bound(_fixed([[0.5, 0.5]])) == pytest.approx(0.75, abs=1e-15)


def test_sampled_nodes_give_a_lower_bound():
    ps = sobol(64, 3, scramble_seed=5)
    full = star_discrepancy_lower_bound(ps)
    sampled = star_discrepancy_lower_bound(ps, nodes=200, node_seed=1)
    assert 0.0 < sampled <= full
    assert sampled == star_discrepancy_lower_bound(ps, nodes=200, node_seed=1)
    with pytest.raises(InvalidArgumentError):
        star_discrepancy_lower_bound(ps, nodes=0)


@pytest.mark.slow
@pytest.mark.parametrize("s", [1, 2])
def test_star_discrepancy_of_sobol_is_monotone_in_m(s):
    values = [star_discrepancy_lower_bound(sobol(2 ** m, s)) for m in range(4, 13)]
    assert all(later <= earlier for earlier, later in zip(values, values[1:])), values


@pytest.mark.slow
@pytest.mark.parametrize("s", [1, 2])
def test_star_discrepancy_sobol_below_random_at_4096(s):
    n = 2 ** 12
    qmc_values = [star_discrepancy_lower_bound(sobol(n, s, scramble_seed=seed)) for seed in range(10)]
    mc_values = [star_discrepancy_lower_bound(pseudo_random(n, s, seed)) for seed in range(10)]
    assert np.median(qmc_values) < np.median(mc_values)


@pytest.mark.slow
def test_star_discrepancy_in_five_dimensions_from_sampled_nodes():
    n = 2 ** 12
    decay = [star_discrepancy_lower_bound(sobol(2 ** m, 5), nodes=4096, node_seed=3) for m in (4, 8, 12)]
    assert decay[0] > decay[1] > decay[2], decay
    qmc_values = [star_discrepancy_lower_bound(sobol(n, 5, scramble_seed=seed), nodes=4096, node_seed=seed) for seed in range(10)]
    mc_values = [star_discrepancy_lower_bound(pseudo_random(n, 5, seed), nodes=4096, node_seed=seed) for seed in range(10)]
    assert np.median(qmc_values) < np.median(mc_values)
