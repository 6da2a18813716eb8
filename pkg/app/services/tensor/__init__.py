from .tensor3 import (
    as_tensor3,
    check_entry_count,
    matricize,
    mode_product,
    mode_products,
    tensor_norm,
    tensorize,
    tucker_rank,
    unfolding_singular_values,
)
from .tucker import TuckerDecomposition, project_onto, tucker_reconstruct
from .cost import (
    Contraction,
    FlopCount,
    MatVec,
    contract_vectors_dense,
    contract_vectors_tucker,
    matvec_dense,
    matvec_factored,
    svd_storage,
    tucker_storage,
)
from .storage import load_matrix, load_tensor, save_matrix, save_tensor
