"""Orbit enumeration, link tables, large-orbit merging, snapshots."""

import numpy as np
import pytest

from f2orbits.group import (compile_generators, generator_set, gl_generators,
                            identity_matrix, small_group_order, transpose_program,
                            block_permutations)
from f2orbits.orbits import (DEFAULT_MEM_CAP, LinkTable, MemoryCapError, OrbitAtlas,
                             OrbitRecord, build_link_table, enumerate_orbits,
                             load_atlas, merge_large_orbits, orbit_member_blocks,
                             required_bytes, resolve_strategy, save_atlas, spin)
from f2orbits.tensor import Shape, get_entry, index_of


def reference_apply(shape, action, code):
    # per-entry oracle, shared logic with nothing in the compiled path
    k = action.mode - 1
    mat = action.matrix
    out = 0
    for p in range(shape.entry_count):
        idx = index_of(shape, p)
        bit = 0
        for j in range(1, shape.dims[k] + 1):
            src = idx[:k] + (j,) + idx[k + 1:]
            bit ^= mat.entry(j, idx[k]) & get_entry(shape, code, src)
        if bit:
            out |= 1 << (shape.entry_count - 1 - p)
    return out


def python_spin(shape, start):
    actions = generator_set(shape).actions
    seen = {start}
    frontier = [start]
    while frontier:
        grown = []
        for c in frontier:
            for a in actions:
                img = reference_apply(shape, a, c)
                if img not in seen:
                    seen.add(img)
                    grown.append(img)
        frontier = grown
    return seen


# ---- spin ----

def test_spin_known_sizes():
    s = Shape((2, 2, 2))
    assert spin(s, 1).size == 27
    assert spin(s, 24).size == 108
    assert spin(s, 107).size == 12


def test_spin_matches_python_bfs():
    s = Shape((2, 2, 2))
    for start in (1, 6, 18, 24, 107, 255):
        assert set(spin(s, start).tolist()) == python_spin(s, start)


def test_spin_output_sorted_contains_start():
    s = Shape((3, 2, 2))
    for start in (1, 77, 4095):
        orb = spin(s, start)
        assert (np.diff(orb.astype(np.int64)) > 0).all()
        assert start in orb
        assert 0 not in orb


def test_spin_closed_under_generators():
    s = Shape((2, 2, 2, 2))
    orb = spin(s, 361)
    members = set(orb.tolist())
    for prog in compile_generators(s, generator_set(s)):
        assert {prog(c) for c in members} == members


def test_spin_rejects_zero():
    with pytest.raises(ValueError):
        spin(Shape((2, 2, 2)), 0)


# ---- full enumeration ----

def test_orbit_counts_small_formats(engine):
    assert engine.atlas("2x2x2").orbit_count == 7
    assert engine.atlas("3x2x2").orbit_count == 9
    assert engine.atlas("3x3x2").orbit_count == 20


def test_zero_code_is_orbit_zero(engine):
    atlas = engine.atlas("2x2x2")
    assert atlas.orbit_id(0) == 0
    assert int(atlas.assignment[0]) == 0


def test_orbit_partition_sums(engine):
    for fmt in ("2x2x2", "3x2x2", "2x2x2x2", "3x3x2"):
        atlas = engine.atlas(fmt)
        total = sum(r.size for r in atlas.records)
        assert total == engine.shape(fmt).code_bound - 1


def test_orbit_sizes_divide_group_order(engine):
    for fmt in ("2x2x2", "3x2x2", "2x2x2x2", "3x3x2"):
        order = small_group_order(engine.shape(fmt))
        for r in engine.atlas(fmt).records:
            assert order % r.size == 0


def test_orbit_ids_follow_canonical_order(engine):
    for fmt in ("2x2x2", "3x2x2", "2x2x2x2"):
        atlas = engine.atlas(fmt)
        canons = [r.canonical for r in atlas.records]
        assert canons == sorted(canons)
        for r in atlas.records:
            assert atlas.orbit_id(r.canonical) == r.orbit_id


def test_canonical_is_orbit_minimum(engine):
    atlas = engine.atlas("3x2x2")
    a = atlas.assignment
    for r in atlas.records:
        members = np.flatnonzero(a == r.orbit_id)
        assert members.size == r.size
        assert int(members.min()) == r.canonical


def test_generator_closure_preserves_ids_exhaustive(engine):
    # every code and every generator, all formats up to 16 entries
    for fmt in ("2x2x2", "3x2x2", "4x2x2", "2x2x2x2"):
        s = engine.shape(fmt)
        atlas = engine.atlas(fmt)
        codes = np.arange(s.code_bound, dtype=np.uint32)
        for prog in compile_generators(s, generator_set(s)):
            images = prog.apply_array(codes.copy())
            assert (atlas.assignment[images] == atlas.assignment).all()


def test_enumeration_accepts_custom_generators():
    # identity-only generators: every nonzero code is its own orbit
    s = Shape((2, 2, 2))
    from f2orbits.group import GeneratorSet, ModeAction
    gens = GeneratorSet(s, (ModeAction(1, identity_matrix(2)),))
    atlas = enumerate_orbits(s, gens)
    assert atlas.orbit_count == 255
    assert all(r.size == 1 for r in atlas.records)


def test_cell_width_four_matches_default(engine):
    s = Shape((3, 2, 2))
    wide = enumerate_orbits(s, cell_width=4)
    narrow = engine.atlas("3x2x2")
    assert wide.assignment.dtype == np.uint32
    assert (wide.assignment == narrow.assignment).all()
    assert wide.records == narrow.records


def test_orbit_member_blocks_partition(engine):
    atlas = engine.atlas("3x2x2")
    order, offsets = orbit_member_blocks(atlas)
    assert offsets[0] == 0
    seen = set()
    for r in atlas.records:
        block = order[offsets[r.orbit_id - 1]:offsets[r.orbit_id]]
        assert block.size == r.size
        assert int(block[0]) == r.canonical
        assert (np.diff(block.astype(np.int64)) > 0).all()
        ids = atlas.assignment[block]
        assert (ids == r.orbit_id).all()
        seen.update(block.tolist())
    assert len(seen) == atlas.shape.code_bound - 1


# ---- memory cap ----

def test_memory_cap_refusal():
    # enumerate_orbits budgets its own table: code_bound cells
    s = Shape((3, 3, 2))
    need = s.code_bound * 2
    with pytest.raises(MemoryCapError) as exc:
        enumerate_orbits(s, mem_cap=need - 1)
    assert exc.value.required == need
    assert exc.value.cap == need - 1
    assert "F2TO_MEM_CAP" in str(exc.value)


def test_required_bytes_and_strategy():
    assert resolve_strategy("auto", Shape((3, 2, 2))) == "link-table"
    assert resolve_strategy("auto", Shape((3, 3, 3))) == "orbit-graph"
    assert resolve_strategy("orbit-graph", Shape((2, 2, 2))) == "orbit-graph"
    with pytest.raises(ValueError):
        resolve_strategy("magic", Shape((2, 2, 2)))
    s = Shape((3, 3, 2))
    assert required_bytes(s, "link-table") > required_bytes(s, "orbit-graph")
    assert required_bytes(s, "orbit-graph", 4) == 2 * required_bytes(s, "orbit-graph", 2)
    assert DEFAULT_MEM_CAP == 2 * 1024 ** 3


# ---- link table ----

def test_link_table_cycle_length(engine):
    lt = build_link_table(engine.atlas("2x2x2"))
    assert isinstance(lt, LinkTable)
    code, steps = 1, 0
    while True:
        code = int(lt.successor[code])
        steps += 1
        assert steps <= 27
        if code == 1:
            break
    assert steps == 27


def test_link_table_is_orbit_permutation(engine):
    atlas = engine.atlas("2x2x2")
    lt = build_link_table(atlas)
    succ = lt.successor
    # each orbit's members form a single cycle in increasing order
    for r in atlas.records:
        members = np.flatnonzero(atlas.assignment == r.orbit_id)
        mset = set(members.tolist())
        for i, c in enumerate(members[:-1]):
            assert int(succ[c]) == int(members[i + 1])
        assert int(succ[members[-1]]) == int(members[0])
        assert {int(succ[c]) for c in mset} == mset


def test_link_table_singleton_orbit():
    # fabricated atlas: one big orbit plus the singleton {5}
    s = Shape((2, 2, 2))
    assignment = np.ones(256, dtype=np.uint16)
    assignment[0] = 0
    assignment[5] = 2
    records = (OrbitRecord(1, 1, 254), OrbitRecord(2, 5, 1))
    atlas = OrbitAtlas(s, assignment, records)
    lt = build_link_table(atlas)
    assert int(lt.successor[5]) == 5


# ---- large orbits ----

def test_merge_known_example(engine):
    atlas = engine.atlas("2x2x2")
    large = merge_large_orbits(engine.shape("2x2x2"), atlas)
    assert large.orbit_count == 5
    fused = next(r for r in large.records if r.canonical == 6)
    assert fused.size == 54
    ids = large.constituents[fused.orbit_id - 1]
    assert sorted(atlas.record(i).canonical for i in ids) == [6, 18, 20]


def test_merge_grouping_invariants(engine):
    for fmt in ("2x2x2", "3x2x2", "2x2x2x2"):
        atlas = engine.atlas(fmt)
        large = engine.large(fmt)
        assert large.grouping[0] == 0
        covered = []
        for rec, cons in zip(large.records, large.constituents):
            assert rec.canonical == min(atlas.record(i).canonical for i in cons)
            assert rec.size == sum(atlas.record(i).size for i in cons)
            for i in cons:
                assert int(large.grouping[i]) == rec.orbit_id
            covered.extend(cons)
        assert sorted(covered) == list(range(1, atlas.orbit_count + 1))
        assert sum(r.size for r in large.records) == atlas.shape.code_bound - 1


def test_merge_with_no_equal_dims_is_identity(engine):
    atlas = engine.atlas("4x3x2")
    large = merge_large_orbits(engine.shape("4x3x2"), atlas)
    assert large.orbit_count == atlas.orbit_count
    assert [r.canonical for r in large.records] == \
        [r.canonical for r in atlas.records]


def test_merge_matches_direct_enumeration():
    # oracle: enumerate under the mode-permutation programs as extra
    # generators and compare canonical/size multisets
    for dims in ((2, 2, 2), (3, 2, 2), (2, 2, 2, 2), (3, 3, 2)):
        s = Shape(dims)
        atlas = enumerate_orbits(s)
        large = merge_large_orbits(s, atlas)
        perms = block_permutations(s)
        progs = tuple(transpose_program(s, p) for p in perms[1:])
        direct = enumerate_orbits(s, extra_programs=progs)
        assert [(r.canonical, r.size) for r in large.records] == \
            [(r.canonical, r.size) for r in direct.records]


# ---- snapshots ----

def test_snapshot_roundtrip(tmp_path, engine):
    atlas = engine.atlas("3x2x2")
    path = tmp_path / "orbits.snap"
    save_atlas(atlas, str(path))
    back = load_atlas(str(path))
    assert back.shape == atlas.shape
    assert (back.assignment == atlas.assignment).all()
    assert back.records == atlas.records


def test_snapshot_rejects_corruption(tmp_path, engine):
    atlas = engine.atlas("2x2x2")
    path = tmp_path / "orbits.snap"
    save_atlas(atlas, str(path))
    blob = path.read_bytes()

    bad_magic = b"XXXX" + blob[4:]
    (tmp_path / "m.snap").write_bytes(bad_magic)
    with pytest.raises(ValueError):
        load_atlas(str(tmp_path / "m.snap"))

    (tmp_path / "t.snap").write_bytes(blob[:-3])
    with pytest.raises(ValueError):
        load_atlas(str(tmp_path / "t.snap"))

    (tmp_path / "x.snap").write_bytes(blob + b"\x00")
    with pytest.raises(ValueError):
        load_atlas(str(tmp_path / "x.snap"))

    # corrupt one record size so the partition no longer sums
    size_field = blob.rfind((27).to_bytes(8, "little"))
    assert size_field != -1
    mangled = blob[:size_field] + (28).to_bytes(8, "little") + blob[size_field + 8:]
    (tmp_path / "s.snap").write_bytes(mangled)
    with pytest.raises(ValueError):
        load_atlas(str(tmp_path / "s.snap"))


def test_snapshot_shape_check(tmp_path, engine):
    path = tmp_path / "orbits.snap"
    save_atlas(engine.atlas("2x2x2"), str(path))
    with pytest.raises(ValueError):
        load_atlas(str(path), Shape((3, 2, 2)))
    ok = load_atlas(str(path), Shape((2, 2, 2)))
    assert ok.orbit_count == 7
