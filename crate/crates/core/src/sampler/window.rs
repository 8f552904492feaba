//! Sequential sampling of the continuous bead process on a window.
//!
//! The window is cut into cells of width at most `grid_step`. The cell
//! occupation process has kernel `√(h_i h_j) J_γ(x_i - x_j, c_i - c_j)`; cells
//! are decided in order, each from its current diagonal entry, and the
//! remaining kernel is conditioned by a rank-one Schur update. Accepted points
//! are placed uniformly inside their cell.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dpp::{BeadPoint, WindowSpec};
use crate::error::{Error, Result};
use crate::kernel::{BeadKernel, KernelParams};

/// Largest accepted cell width.
pub const MAX_GRID_STEP: f64 = 0.05;
const PROB_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
struct Cell {
    thread: i64,
    lo: f64,
    width: f64,
}

/// Precomputed cell kernel for repeated sampling on one window.
#[derive(Debug, Clone)]
pub struct DppWindowSampler {
    cells: Vec<Cell>,
    kernel: Vec<f64>,
}

impl DppWindowSampler {
    pub fn new(params: KernelParams, window: &WindowSpec, grid_step: f64) -> Result<Self> {
        if !(grid_step > 0.0 && grid_step <= MAX_GRID_STEP) {
            return Err(Error::domain(format!(
                "grid step {grid_step} must lie in (0, {MAX_GRID_STEP}]"
            )));
        }
        let mut cells = Vec::new();
        for iv in window.intervals() {
            if iv.is_empty() {
                continue;
            }
            let count = (iv.len() / grid_step).ceil() as usize;
            let width = iv.len() / count as f64;
            for k in 0..count {
                cells.push(Cell {
                    thread: iv.thread,
                    lo: iv.lo + k as f64 * width,
                    width,
                });
            }
        }
        let centers: Vec<BeadPoint> = cells
            .iter()
            .map(|c| BeadPoint {
                thread: c.thread,
                position: c.lo + 0.5 * c.width,
            })
            .collect();
        let j = BeadKernel::new(params).matrix(&centers)?;
        let n = cells.len();
        let mut kernel = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                kernel[r * n + c] = (cells[r].width * cells[c].width).sqrt() * j[(r, c)];
            }
        }
        Ok(Self { cells, kernel })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// One configuration. Cost is `O(n³/3)` in the number of cells.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<BeadPoint>> {
        let n = self.cells.len();
        let mut k = self.kernel.clone();
        let mut points = Vec::new();
        for i in 0..n {
            let p = k[i * n + i];
            if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p) {
                return Err(Error::Accuracy {
                    context: format!("conditional occupation probability of cell {i} is {p}"),
                    estimate: p,
                    tolerance: PROB_SLACK,
                });
            }
            let selected = rng.gen::<f64>() < p;
            if selected {
                let c = self.cells[i];
                points.push(BeadPoint {
                    thread: c.thread,
                    position: c.lo + rng.gen::<f64>() * c.width,
                });
            }
            let pivot = if selected { p } else { p - 1.0 };
            if pivot == 0.0 || i + 1 == n {
                continue;
            }
            // Condition the undecided block on the outcome of cell i.
            let (head, tail) = k.split_at_mut((i + 1) * n);
            let row_i = &head[i * n..];
            for r in 0..n - i - 1 {
                let row = &mut tail[r * n..(r + 1) * n];
                let f = row[i] / pivot;
                if f == 0.0 {
                    continue;
                }
                for c in i + 1..n {
                    row[c] -= f * row_i[c];
                }
            }
        }
        Ok(points)
    }
}

/// One configuration of the bead process restricted to `window`.
pub fn sample_dpp_window(
    params: KernelParams,
    window: &WindowSpec,
    grid_step: f64,
    seed: u64,
) -> Result<Vec<BeadPoint>> {
    let sampler = DppWindowSampler::new(params, window, grid_step)?;
    sampler.sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// `count` independent configurations from one seeded stream.
pub fn sample_dpp_batch(
    params: KernelParams,
    window: &WindowSpec,
    grid_step: f64,
    seed: u64,
    count: usize,
) -> Result<Vec<Vec<BeadPoint>>> {
    let sampler = DppWindowSampler::new(params, window, grid_step)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sampler.sample(&mut rng)).collect()
}
