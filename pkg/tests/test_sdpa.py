from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from exitmoment.augment import SdeModel, augment, scale_model
from exitmoment.momentproblem import ConicProgram, PsdBlock, assemble
from exitmoment.sdpa import export_sdpa, program_sdpa_image, read_sdpa

GOLDEN = Path(__file__).parent / "golden"


def trivial_program():
    return ConicProgram(
        num_vars=1,
        objective=np.array([1.0]),
        sense="max",
        a_eq=sp.csr_matrix(np.array([[1.0]])),
        rhs=np.array([0.25]),
        blocks=[PsdBlock("M", 1, sp.csr_matrix(np.array([[1.0]])))],
    )


def brownian_program(K=4):
    model = scale_model(augment(SdeModel.from_strings(
        ["y"], ["0"], [["1"]], [0.5], 10.0, ["y", "1 - y"])))
    return assemble(model, "reduced", K, 1, "max")


def test_trivial_export_matches_golden(tmp_path):
    out = tmp_path / "trivial.dat-s"
    export_sdpa(trivial_program(), out)
    assert out.read_bytes() == (GOLDEN / "trivial.dat-s").read_bytes()


def test_block_sizes_match_assembled_dimensions(tmp_path):
    program = brownian_program()
    out = tmp_path / "bm.dat-s"
    export_sdpa(program, out)
    data = read_sdpa(out)
    psd = [s for s in data.block_sizes if s > 0]
    assert psd == [b.dim for b in program.blocks]
    (diag,) = [s for s in data.block_sizes if s < 0]
    assert diag == -2 * program.a_eq.shape[0]
    assert data.num_vars == program.num_vars


def test_round_trip_exact(tmp_path):
    program = brownian_program()
    out = tmp_path / "bm.dat-s"
    export_sdpa(program, out)
    parsed = read_sdpa(out)
    image = program_sdpa_image(program)
    assert parsed.num_vars == image.num_vars
    assert parsed.block_sizes == image.block_sizes
    assert parsed.c == image.c
    assert parsed.entries == image.entries


def test_reader_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.dat-s"
    bad.write_text("*comment\n3\n")
    with pytest.raises(ValueError):
        read_sdpa(bad)
    bad.write_text("1\n1\n1\n0.0\n1 1 1 1\n")
    with pytest.raises(ValueError):
        read_sdpa(bad)


def test_objective_negated_for_max(tmp_path):
    program = trivial_program()
    out = tmp_path / "t.dat-s"
    export_sdpa(program, out)
    data = read_sdpa(out)
    assert data.c == [-1.0]
    text = out.read_text()
    assert "sense: max" in text
