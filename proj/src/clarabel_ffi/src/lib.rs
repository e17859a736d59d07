//! C ABI around the Clarabel conic solver.
//!
//! Solves   minimize    q'x
//!          subject to  b - A x in K
//! where K is a product of zero, nonnegative and PSD-triangle cones,
//! listed in row order of A. PSD slacks use Clarabel's svec convention:
//! upper triangle, column-major, off-diagonal entries scaled by sqrt(2).

use clarabel::algebra::CscMatrix;
use clarabel::solver::*;

pub const CONE_ZERO: i32 = 0;
pub const CONE_NONNEG: i32 = 1;
pub const CONE_PSD_TRIANGLE: i32 = 2;

pub const STATUS_SOLVED: i32 = 0;
pub const STATUS_PRIMAL_INFEASIBLE: i32 = 1;
pub const STATUS_DUAL_INFEASIBLE: i32 = 2;
pub const STATUS_ALMOST_SOLVED: i32 = 3;
pub const STATUS_MAX_ITERATIONS: i32 = 4;
pub const STATUS_NUMERICAL_ERROR: i32 = 5;
pub const STATUS_SETUP_ERROR: i32 = 6;

/// Solve one conic problem. Returns a STATUS_* code. All output buffers
/// must be preallocated by the caller (x: n, z: m, s: m).
///
/// # Safety
/// Pointers must reference buffers of the documented sizes.
#[no_mangle]
pub unsafe extern "C" fn clarabel_ffi_solve(
    n: usize,
    m: usize,
    a_colptr: *const usize, // n + 1
    a_rowind: *const usize, // nnz
    a_nzval: *const f64,    // nnz
    b: *const f64,          // m
    q: *const f64,          // n
    n_cones: usize,
    cone_kinds: *const i32,
    cone_dims: *const usize,
    tol: f64,
    max_iter: u32,
    verbose: i32,
    x_out: *mut f64,
    z_out: *mut f64,
    s_out: *mut f64,
    obj_out: *mut f64,
    iters_out: *mut u32,
) -> i32 {
    let colptr = std::slice::from_raw_parts(a_colptr, n + 1).to_vec();
    let nnz = colptr[n];
    let rowind = std::slice::from_raw_parts(a_rowind, nnz).to_vec();
    let nzval = std::slice::from_raw_parts(a_nzval, nnz).to_vec();
    let b = std::slice::from_raw_parts(b, m).to_vec();
    let q = std::slice::from_raw_parts(q, n).to_vec();
    let kinds = std::slice::from_raw_parts(cone_kinds, n_cones);
    let dims = std::slice::from_raw_parts(cone_dims, n_cones);

    let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(n_cones);
    for (kind, dim) in kinds.iter().zip(dims.iter()) {
        match *kind {
            CONE_ZERO => cones.push(ZeroConeT(*dim)),
            CONE_NONNEG => cones.push(NonnegativeConeT(*dim)),
            CONE_PSD_TRIANGLE => cones.push(PSDTriangleConeT(*dim)),
            _ => return STATUS_SETUP_ERROR,
        }
    }

    let p = CscMatrix::<f64>::zeros((n, n));
    let a = CscMatrix::new(m, n, colptr, rowind, nzval);

    let settings = match DefaultSettingsBuilder::default()
        .verbose(verbose != 0)
        .max_iter(max_iter)
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .build()
    {
        Ok(s) => s,
        Err(_) => return STATUS_SETUP_ERROR,
    };

    let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, settings) {
        Ok(s) => s,
        Err(_) => return STATUS_SETUP_ERROR,
    };
    solver.solve();

    let sol = &solver.solution;
    std::ptr::copy_nonoverlapping(sol.x.as_ptr(), x_out, n);
    std::ptr::copy_nonoverlapping(sol.z.as_ptr(), z_out, m);
    std::ptr::copy_nonoverlapping(sol.s.as_ptr(), s_out, m);
    *obj_out = sol.obj_val;
    *iters_out = sol.iterations;

    match sol.status {
        SolverStatus::Solved => STATUS_SOLVED,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            STATUS_PRIMAL_INFEASIBLE
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            STATUS_DUAL_INFEASIBLE
        }
        SolverStatus::AlmostSolved => STATUS_ALMOST_SOLVED,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => STATUS_MAX_ITERATIONS,
        _ => STATUS_NUMERICAL_ERROR,
    }
}
