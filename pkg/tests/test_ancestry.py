import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracwalk import _kernels
from fracwalk.ancestry import (brute_force_partition, component_counts, component_partition,
                               meeting_probability_mc, meeting_scan, sample_parents)
from fracwalk.laws import finite_law, make_tail_law, tail
from fracwalk.seeding import PARENTS, stream_key


def canonical(labels):
    seen = {}
    return np.array([seen.setdefault(v, len(seen)) for v in labels])


def test_delta1_parents_and_single_component():
    pm = sample_parents(finite_law([1.0]), 0, 50, seed=1)
    assert np.all(pm.parent_offset == 1)
    part = component_partition(pm)
    assert part.n_components == 1
    assert list(part.exit_points) == [-1]


def test_overlapping_windows_agree():
    law = make_tail_law(0.25)
    a = sample_parents(law, -100, 50, seed=5, stream=3)
    b = sample_parents(law, 0, 200, seed=5, stream=3)
    assert np.array_equal(a.parent_offset[100:], b.parent_offset[:51])
    c = sample_parents(law, 0, 200, seed=5, stream=4)
    assert not np.array_equal(b.parent_offset, c.parent_offset)


def test_parent_offsets_follow_law():
    law = make_tail_law(0.25)
    k = sample_parents(law, 0, 10 ** 6, seed=2).parent_offset
    eps = math.sqrt(math.log(2 / 0.001) / (2 * len(k)))
    grid = np.unique(np.geomspace(1, 1e7, 100).astype(np.int64))
    emp = np.array([(k >= n).mean() for n in grid])
    assert np.max(np.abs(emp - tail(law, grid))) < eps


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_union_find_matches_brute_force(data):
    m = data.draw(st.integers(1, 20))
    offsets = np.array([data.draw(st.integers(1, i + 3)) for i in range(m)], dtype=np.int64)
    lo = data.draw(st.integers(-5, 5))
    from fracwalk.ancestry import ParentMap
    part = component_partition(ParentMap(lo, lo + m - 1, offsets, 0))
    assert np.array_equal(canonical(part.representative), brute_force_partition(lo, offsets))
    # one exit point per component, all below the window
    assert len(part.exit_points) == part.n_components
    assert np.all(part.exit_points < lo)


def test_two_point_law_components_equal_exits():
    pm = sample_parents(finite_law([0.5, 0.5]), 0, 500, seed=4)
    part = component_partition(pm)
    assert part.n_components == len(part.exit_points) == len(set(part.min_vertex))
    assert 1 <= part.n_components <= 2


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_lazy_trace_equals_dense_window(seed):
    law = make_tail_law(0.25)
    n, depth = 300, 3000
    comp, min_v, exits, csize = _kernels.trace_components(
        *law.kernel_params(), stream_key(seed, PARENTS, 0), np.int64(n), np.int64(depth))
    dense = component_partition(sample_parents(law, -depth, n, seed=seed, stream=0))
    dense_labels = dense.representative[depth + 1:]
    assert np.array_equal(canonical(comp[1:]), canonical(dense_labels))
    assert csize.sum() == n


def test_component_counts():
    counts = component_counts(make_tail_law(0.25), 200, 2000, 50, seed=3, threads=1)
    assert np.array_equal(counts, component_counts(make_tail_law(0.25), 200, 2000, 50, seed=3,
                                                   threads=4))
    assert np.all(counts[:, 1] <= counts[:, 0])
    assert np.all(component_counts(finite_law([1.0]), 100, 800, 5, seed=1)[:, 0] == 1)


def test_meeting_delta1_and_monotone():
    assert meeting_probability_mc(finite_law([1.0]), 3, 10, 100, seed=1).estimate == 1.0
    scan = meeting_scan(make_tail_law(0.75), 1, [10, 1000, 100000], 3000, seed=2)
    est = [e.estimate for e in scan]
    assert est == sorted(est)
    assert all(e.ci >= 0 for e in scan)


def test_meeting_two_point_law():
    est = meeting_probability_mc(finite_law([0.5, 0.5]), 1, 10 ** 4, 20000, seed=3)
    assert est.estimate > 0.999


def test_meeting_matches_rho():
    from fracwalk.diagnostics import correlations_for
    law = make_tail_law(0.25)
    rho = correlations_for(law, 64).rho(3)
    est = meeting_probability_mc(law, 3, 10 ** 6, 20000, seed=7)
    assert est.estimate <= rho + est.ci
    assert abs(est.estimate - rho) < 0.02


def test_meeting_rejects_bad_k():
    with pytest.raises(ValueError):
        meeting_probability_mc(make_tail_law(0.25), 0, 10, 10, seed=1)
