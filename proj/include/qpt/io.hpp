#pragma once

// JSON encodings.
//
//   matrix : {"rows": r, "cols": c, "re": [...], "im": [...]}   (row-major)
//   state  : {"matrix": <matrix>, "weight": tr(rho), ...}
//   chi    : {"basis": ["I","X","Y","Z"], "re": [[4x4]], "im": [[4x4]]}

#include "qpt/analysis.hpp"
#include "qpt/process_tomo.hpp"
#include "qpt/scenario.hpp"

#include <json.hpp>

namespace qpt {

using json = nlohmann::ordered_json;

json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);

json state_to_json(const DensityMatrix& rho);
/// Accepts either a bare matrix object or an object with a "matrix" field.
DensityMatrix state_from_json(const json& j);

json chi_to_json(const ChiMatrix& chi);
ChiMatrix chi_from_json(const json& j);

/// chi encoding plus method, min_eigenvalue, hermiticity_residual and
/// input_state_schmidt_coefficients.
json estimate_to_json(const ProcessEstimate& est);

json chi_report_to_json(const ChiReport& r);
json stokes_to_json(const StokesVector& s);
json sphere_summary_to_json(const SphereMesh& mesh);
/// [{method, mean_fidelity, std_fidelity, trials}, ...]
json comparison_to_json(const ComparisonReport& report);

}  // namespace qpt
