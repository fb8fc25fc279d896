//! Single-level big-M model of the leader problem.
//!
//! Variables: `z0`, `x`, local duals, coupling duals, equality duals and one
//! binary per complementarity pair. Each inequality row `a x ≤ b` with dual `λ`
//! contributes `λ ≤ M_d·z` and `b − a x ≤ M_p·(1 − z)`.

use super::game::AssembledGame;
use super::layout::{Block, RowTag};
use super::mps::{parse_mps, Bound, BoundKind, MpsColumn, MpsError, MpsModel, RowType};
use std::path::Path;

/// Big-M constants per complementarity row: local rows first, then coupling rows.
#[derive(Debug, Clone, PartialEq)]
pub struct BigM {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
}

impl BigM {
    pub const DEFAULT_PRIMAL: f64 = 1e3;
    pub const DEFAULT_DUAL: f64 = 1e4;

    pub fn uniform(game: &AssembledGame, primal: f64, dual: f64) -> Self {
        let m = game.f_local.nrows() + game.a_coup.nrows();
        BigM { primal: vec![primal; m], dual: vec![dual; m] }
    }

    pub fn defaults(game: &AssembledGame) -> Self {
        Self::uniform(game, Self::DEFAULT_PRIMAL, Self::DEFAULT_DUAL)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("big-M vector has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("big-M constant for row {row} must be positive, got {value}")]
    Nonpositive { row: usize, value: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Parse(#[from] MpsError),
}

fn block_code(b: Block) -> &'static str {
    match b {
        Block::P => "P",
        Block::Y => "Y",
        Block::E => "E",
        Block::Charge => "PC",
        Block::Discharge => "PDC",
        Block::K => "K",
        Block::T => "T",
    }
}

fn row_label(tag: &RowTag) -> String {
    let kind = format!("{:?}", tag.kind);
    match tag.prosumer {
        Some(i) => format!("{kind}_{i}_{}", tag.tau),
        None => format!("{kind}_{}", tag.tau),
    }
}

/// Builds the big-M single-level model in memory. `tikhonov` is the weight `ε` of `ε‖x‖²`, adding `2εx` to stationarity.
pub fn build_bigm(game: &AssembledGame, bigm: &BigM, tikhonov: f64) -> Result<MpsModel, ExportError> {
    let lay = game.layout;
    let t = lay.t;
    let nx = lay.len();
    let ml = game.f_local.nrows();
    let mc = game.a_coup.nrows();
    let me = game.e_local.nrows();
    let ncomp = ml + mc;
    for v in [&bigm.primal, &bigm.dual] {
        if v.len() != ncomp {
            return Err(ExportError::Length { expected: ncomp, got: v.len() });
        }
    }
    for (row, &value) in bigm.primal.iter().chain(&bigm.dual).enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ExportError::Nonpositive { row: row % ncomp, value });
        }
    }

    // column offsets
    let c_z = 0;
    let c_x = c_z + 2 * t;
    let c_ll = c_x + nx;
    let c_lc = c_ll + ml;
    let c_nu = c_lc + mc;
    let c_bin = c_nu + me;
    let ncol = c_bin + ncomp;
    let mut columns = Vec::with_capacity(ncol);
    for tau in 0..t {
        columns.push(MpsColumn { name: format!("C0_{tau}"), integer: false });
    }
    for tau in 0..t {
        columns.push(MpsColumn { name: format!("ALPHA_{tau}"), integer: false });
    }
    for k in 0..nx {
        let (b, tau) = lay.locate(k % lay.per_follower());
        columns.push(MpsColumn { name: format!("{}_{}_{tau}", block_code(b), k / lay.per_follower()), integer: false });
    }
    for tag in &game.local_rows {
        columns.push(MpsColumn { name: format!("LAM_{}", row_label(tag)), integer: false });
    }
    for tag in &game.coup_rows {
        columns.push(MpsColumn { name: format!("LAM_{}", row_label(tag)), integer: false });
    }
    for tag in &game.eq_rows {
        columns.push(MpsColumn { name: format!("NU_{}", row_label(tag)), integer: false });
    }
    for tag in game.local_rows.iter().chain(&game.coup_rows) {
        columns.push(MpsColumn { name: format!("BIN_{}", row_label(tag)), integer: true });
    }

    let mut rows: Vec<(String, RowType)> = vec![("OBJ".into(), RowType::Objective)];
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs: Vec<(usize, f64)> = Vec::new();
    let mut push_row = |name: String, ty: RowType, coeffs: Vec<(usize, f64)>, b: f64,
                        rows: &mut Vec<(String, RowType)>, triplets: &mut Vec<(usize, usize, f64)>| {
        let r = rows.len();
        rows.push((name, ty));
        for (c, v) in coeffs {
            if v != 0.0 {
                triplets.push((r, c, v));
            }
        }
        if b != 0.0 {
            rhs.push((r, b));
        }
    };

    // objective: linear part 1ᵀΣt + p̃·1ᵀΣk (rebound)
    let scen = &game.scenario;
    for i in 0..lay.n {
        for tau in 0..t {
            triplets.push((0, c_x + lay.idx(i, Block::T, tau), 1.0));
            if scen.request[tau] < 0.0 {
                triplets.push((0, c_x + lay.idx(i, Block::K, tau), scen.p_tilde));
            }
        }
    }
    // ½vᵀQv form of −c1(Σp)² and the bilinear −c0ᵀΣp − αᵀΣt; both diagonal and
    // listed off-diagonal entries of −c1(Σp)² come out as −2c1
    let mut quad = Vec::new();
    for tau in 0..t {
        for i in 0..lay.n {
            for j in 0..=i {
                let a = c_x + lay.idx(i, Block::P, tau);
                let b = c_x + lay.idx(j, Block::P, tau);
                quad.push((a, b, -2.0 * scen.c1[tau]));
            }
        }
        for i in 0..lay.n {
            quad.push((c_x + lay.idx(i, Block::P, tau), c_z + tau, -1.0));
            quad.push((c_x + lay.idx(i, Block::T, tau), c_z + t + tau, -1.0));
        }
    }
    quad.retain(|q| q.2 != 0.0);

    for k in 0..game.gamma.f.nrows() {
        let coeffs = (0..2 * t).map(|c| (c_z + c, game.gamma.f[(k, c)])).collect();
        push_row(format!("GAMMA_{k}"), RowType::Less, coeffs, game.gamma.g[k], &mut rows, &mut triplets);
    }
    for k in 0..nx {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for c in 0..nx {
            let mut v = game.big_q[(k, c)];
            if c == k {
                v += 2.0 * tikhonov;
            }
            coeffs.push((c_x + c, v));
        }
        for c in 0..2 * t {
            coeffs.push((c_z + c, game.c_map[(k, c)]));
        }
        for r in 0..ml {
            coeffs.push((c_ll + r, game.f_local[(r, k)]));
        }
        for r in 0..mc {
            coeffs.push((c_lc + r, game.a_coup[(r, k)]));
        }
        for r in 0..me {
            coeffs.push((c_nu + r, game.e_local[(r, k)]));
        }
        push_row(format!("STAT_{}", columns[c_x + k].name), RowType::Equal, coeffs, -game.q_lin[k], &mut rows, &mut triplets);
    }
    for r in 0..me {
        let coeffs = (0..nx).map(|c| (c_x + c, game.e_local[(r, c)])).collect();
        push_row(format!("EQ_{}", row_label(&game.eq_rows[r])), RowType::Equal, coeffs, game.e_rhs[r], &mut rows, &mut triplets);
    }
    let ineq = |r: usize| -> (Vec<(usize, f64)>, f64, String) {
        if r < ml {
            ((0..nx).map(|c| (c_x + c, game.f_local[(r, c)])).collect(), game.f_rhs[r], row_label(&game.local_rows[r]))
        } else {
            let q = r - ml;
            ((0..nx).map(|c| (c_x + c, game.a_coup[(q, c)])).collect(), game.b_coup[q], row_label(&game.coup_rows[q]))
        }
    };
    for r in 0..ncomp {
        let (coeffs, b, label) = ineq(r);
        push_row(format!("FEAS_{label}"), RowType::Less, coeffs.clone(), b, &mut rows, &mut triplets);
        let dual_col = if r < ml { c_ll + r } else { c_lc + r - ml };
        push_row(
            format!("MDUAL_{label}"),
            RowType::Less,
            vec![(dual_col, 1.0), (c_bin + r, -bigm.dual[r])],
            0.0,
            &mut rows,
            &mut triplets,
        );
        // b − a x ≤ M_p(1 − z)  ⇔  −a x + M_p z ≤ M_p − b
        let mut coeffs: Vec<(usize, f64)> = coeffs.into_iter().map(|(c, v)| (c, -v)).collect();
        coeffs.push((c_bin + r, bigm.primal[r]));
        push_row(format!("MPRIM_{label}"), RowType::Less, coeffs, bigm.primal[r] - b, &mut rows, &mut triplets);
    }

    triplets.sort_by_key(|&(r, c, _)| (c, r));
    let mut bounds = Vec::new();
    for c in c_z..c_ll {
        bounds.push(Bound { kind: BoundKind::Free, col: c, value: 0.0 });
    }
    for c in c_nu..c_bin {
        bounds.push(Bound { kind: BoundKind::Free, col: c, value: 0.0 });
    }
    for c in c_bin..ncol {
        bounds.push(Bound { kind: BoundKind::Binary, col: c, value: 0.0 });
    }
    Ok(MpsModel { name: "DRGAME_BIGM".into(), rows, columns, entries: triplets, rhs, bounds, quad })
}

/// Writes the big-M model to `path` and returns the in-memory model.
pub fn export_bigm(game: &AssembledGame, bigm: &BigM, tikhonov: f64, path: &Path) -> Result<MpsModel, ExportError> {
    let model = build_bigm(game, bigm, tikhonov)?;
    std::fs::write(path, model.to_mps_string())?;
    Ok(model)
}

/// Reads a model written by [`export_bigm`].
pub fn read_bigm(path: &Path) -> Result<MpsModel, ExportError> {
    Ok(parse_mps(&std::fs::read_to_string(path)?)?)
}
