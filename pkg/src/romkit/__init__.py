"""Stabilizer overlaps, stabilizer fidelity and Robustness of Magic."""

from .cover import build_cover_set, minimal_feasible_solution, verify_cover
from .errors import FormatError, GuardError, InvalidArgument, InvalidState, RomkitError
from .lp import ColumnSet, LPSolution, solve_l1, verify_solution
from .pauli import (
    fwht,
    fwht_inplace,
    pauli_decompose,
    pauli_index,
    pauli_label,
    pauli_reconstruct,
    st_norm,
    tensor,
    tensor_power,
    validate_state,
)
from .product import (
    PauliType,
    build_symmetric_basis,
    compress_pauli_vector,
    compressed_tensor,
    rom_partition,
    rom_symmetric_cg,
    rom_symmetric_divide_conquer,
    rom_symmetric_exact,
    symmetrize_column,
    tensor_certificate,
)
from .rom import RomResult, rom_column_generation, rom_fwht, rom_naive, rom_top_overlap
from .stabilizers import (
    CheckMatrix,
    StabilizerId,
    column,
    count_stabilizer_states,
    dual_sweep,
    enumerate_blocks,
    max_fidelity,
    overlaps_all,
    top_overlap_select,
)
from .states import F_STATE, H_STATE

__version__ = "0.1.0"
