use beads_core::dimer::tentacle::{self, ColumnLabel, TentacleParams};
use beads_core::dimer::{count_boundary_tentacles, DimerModel, MagneticField, RasterGrid};
use beads_core::discrete::{verify_convergence, DiscreteKernel};
use beads_core::dpp::{correlation, counting_distribution, gap_probability, generating_function};
use beads_core::io::{load_graph, Builtin, Table, Value};
use beads_core::sampler::{default_burn_in, sample_dpp_batch, EdgeSeries, TorusChain, TorusTiling};
use beads_core::{BeadKernel, DiscreteParams, Error, KernelParams, PeriodicBipartiteGraph, Result};

use crate::args::*;

fn table<const N: usize>(columns: [&str; N]) -> Table {
    Table::new(columns)
}

fn row(t: &mut Table, cells: Vec<Value>) -> Result<()> {
    t.push(cells)
}

fn source_graph(source: &GraphSource) -> Result<PeriodicBipartiteGraph> {
    match (&source.graph, &source.builtin) {
        (Some(path), _) => load_graph(path),
        (None, Some(b)) => b.graph(),
        (None, None) => Builtin::Honeycomb1x1.graph(),
    }
}

fn model(source: &GraphSource, side: Option<usize>) -> Result<DimerModel> {
    let m = DimerModel::new(source_graph(source)?)?;
    match side {
        None => Ok(m),
        Some(k) => {
            let basis = tentacle::propose_basis(m.newton_polygon(), k)?;
            DimerModel::new(m.graph().change_basis(basis)?)
        }
    }
}

fn side_model(a: &SideArgs) -> Result<(DimerModel, TentacleParams)> {
    let m = model(&a.source, a.side)?;
    let tp = tentacle::tentacle_params(&m, a.root)?;
    Ok((m, tp))
}

pub fn kernel(a: &KernelArgs) -> Result<Table> {
    let mut k = BeadKernel::new(KernelParams::new(a.gamma)?);
    if let Some(tol) = a.tol {
        k = k.with_tolerance(tol);
    }
    let mut t = table(["gamma", "x", "xi", "value", "abs_error_bound"]);
    for &x in &a.x.0 {
        for &xi in &a.xi.0 {
            let v = k.eval(x, xi)?;
            row(
                &mut t,
                vec![
                    a.gamma.into(),
                    x.into(),
                    xi.into(),
                    v.value.into(),
                    v.abs_error_bound.into(),
                ],
            )?;
        }
    }
    Ok(t)
}

pub fn discrete_kernel(a: &DiscreteArgs) -> Result<Table> {
    let k = DiscreteKernel::new(DiscreteParams::new(a.gamma, a.t)?)?;
    let mut t = table(["gamma", "t", "x", "y", "value"]);
    for &x in &a.x.0 {
        for &y in &a.y.0 {
            row(
                &mut t,
                vec![a.gamma.into(), a.t.into(), x.into(), y.into(), k.eval(x, y)?.into()],
            )?;
        }
    }
    Ok(t)
}

pub fn verify(a: &VerifyArgs) -> Result<Table> {
    let mut t = table(["x", "xi", "t", "y", "realized_xi", "discrete", "continuous", "error"]);
    for &x in &a.x.0 {
        for &xi in &a.xi.0 {
            for r in verify_convergence(a.gamma, x, xi, &a.t.0)? {
                row(
                    &mut t,
                    vec![
                        x.into(),
                        xi.into(),
                        r.t.into(),
                        r.y.into(),
                        r.realized_xi.into(),
                        r.discrete.into(),
                        r.continuous.into(),
                        r.error.into(),
                    ],
                )?;
            }
        }
    }
    Ok(t)
}

pub fn correlate(a: &CorrelateArgs) -> Result<Table> {
    let v = correlation(KernelParams::new(a.gamma)?, &a.points.0)?;
    let mut t = table(["gamma", "points", "density"]);
    row(&mut t, vec![a.gamma.into(), a.points.0.len().into(), v.into()])?;
    Ok(t)
}

pub fn gap(a: &GapArgs) -> Result<Table> {
    let p = KernelParams::new(a.gamma)?;
    let mut t = table(["gamma", "window", "gap_probability"]);
    match &a.window {
        GapWindow::Lengths(ls) => {
            for &s in ls {
                row(
                    &mut t,
                    vec![a.gamma.into(), format!("0:0:{s}").into(), gap_probability(p, s)?.into()],
                )?;
            }
        }
        GapWindow::Window(w) => {
            let zeros = vec![0.0; w.intervals().len()];
            let text: Vec<String> = w
                .intervals()
                .iter()
                .map(|i| format!("{}:{}:{}", i.thread, i.lo, i.hi))
                .collect();
            row(
                &mut t,
                vec![
                    a.gamma.into(),
                    text.join(";").into(),
                    generating_function(p, w, &zeros)?.into(),
                ],
            )?;
        }
    }
    Ok(t)
}

pub fn counts(a: &CountsArgs) -> Result<Table> {
    let d = counting_distribution(KernelParams::new(a.gamma)?, &a.window, a.max_n)?;
    let mut t = table(["counts", "probability", "truncation_bound", "discretization_error"]);
    for (c, p) in d.support.iter().zip(&d.probabilities) {
        let label: Vec<String> = c.iter().map(|n| n.to_string()).collect();
        row(
            &mut t,
            vec![
                label.join(";").into(),
                (*p).into(),
                d.truncation_bound.into(),
                d.discretization_error.into(),
            ],
        )?;
    }
    Ok(t)
}

pub fn sample_dpp(a: &SampleDppArgs) -> Result<Table> {
    let samples = sample_dpp_batch(KernelParams::new(a.gamma)?, &a.window, a.grid, a.seed, a.samples)?;
    let mut t = table(["seed", "sample", "thread", "position"]);
    for (k, s) in samples.iter().enumerate() {
        for p in s {
            row(
                &mut t,
                vec![a.seed.to_string().into(), k.into(), p.thread.into(), p.position.into()],
            )?;
        }
    }
    Ok(t)
}

pub fn sample_mcmc(a: &SampleMcmcArgs) -> Result<Table> {
    let params = DiscreteParams::new(a.gamma, a.t)?;
    let (n, m) = a.grid;
    let mut chain = TorusChain::new(params, TorusTiling::flat(n, m)?, a.seed);
    chain.sweep(a.burn_in.unwrap_or_else(|| default_burn_in(n, m)));
    let mut series = EdgeSeries::default();
    let mut t = table(["seed", "measurement", "frac_a", "frac_b", "frac_c", "c_over_b_plus_c"]);
    for k in 0..a.measurements {
        chain.sweep(a.sweeps);
        series.record(chain.tiling());
        row(
            &mut t,
            vec![
                a.seed.to_string().into(),
                k.into(),
                series.fractions[0][k].into(),
                series.fractions[1][k].into(),
                series.fractions[2][k].into(),
                series.ratio[k].into(),
            ],
        )?;
    }
    Ok(t)
}

pub fn charpoly(a: &GraphOnly) -> Result<Table> {
    let m = model(&a.source, a.side)?;
    let mut t = table(["i", "j", "re", "im"]);
    for ((i, j), c) in m.char_poly().terms() {
        row(&mut t, vec![i.into(), j.into(), c.re.into(), c.im.into()])?;
    }
    Ok(t)
}

pub fn newton(a: &GraphOnly) -> Result<Table> {
    let m = model(&a.source, a.side)?;
    let mut t = table(["vertex", "i", "j"]);
    for (k, &(i, j)) in m.newton_polygon().iter().enumerate() {
        row(&mut t, vec![k.into(), i.into(), j.into()])?;
    }
    Ok(t)
}

pub fn amoeba(a: &AmoebaArgs) -> Result<(Table, usize)> {
    let m = model(&a.source, a.side)?;
    let grid = RasterGrid::new(a.grid.0, a.grid.1)?;
    let cells = m.amoeba_raster(&grid);
    let mut t = table(["bx", "by", "phase", "slope_x", "slope_y", "ronkin"]);
    for c in &cells {
        row(
            &mut t,
            vec![
                c.field.bx.into(),
                c.field.by.into(),
                c.phase.as_str().into(),
                c.slope.0.into(),
                c.slope.1.into(),
                c.ronkin.into(),
            ],
        )?;
    }
    Ok((t, count_boundary_tentacles(&grid, &cells)))
}

pub fn ronkin(a: &RonkinArgs) -> Result<Table> {
    let m = model(&a.source, a.side)?;
    let field = MagneticField::new(a.field.0, a.field.1)?;
    let mut t = table(["bx", "by", "ronkin", "phase", "slope_x", "slope_y"]);
    let r = m.ronkin(field)?;
    let (phase, slope) = match m.classify_phase(field) {
        Ok(s) => (s.phase.as_str(), s.slope),
        Err(Error::Indeterminate(_)) => ("indeterminate", (f64::NAN, f64::NAN)),
        Err(e) => return Err(e),
    };
    row(
        &mut t,
        vec![
            field.bx.into(),
            field.by.into(),
            r.into(),
            phase.into(),
            slope.0.into(),
            slope.1.into(),
        ],
    )?;
    Ok(t)
}

pub fn tentacle_cmd(a: &TentacleArgs) -> Result<Table> {
    let m = model(&a.side.source, a.side.side)?;
    match &a.by {
        None => {
            let mut t = table(["root", "c", "sign_gauge", "beta", "delta0"]);
            let n = tentacle::bottom_roots(&m)?.len();
            for k in 0..n {
                let tp = tentacle::tentacle_params(&m, k)?;
                row(
                    &mut t,
                    vec![
                        k.into(),
                        tp.c.into(),
                        tp.sign_gauge.into(),
                        tp.beta.into(),
                        tp.delta0.into(),
                    ],
                )?;
            }
            Ok(t)
        }
        Some(by) => {
            let tp = tentacle::tentacle_params(&m, a.side.root)?;
            let mut t = table(["by", "left", "right", "predicted_half_width", "fitted_beta", "beta"]);
            for r in tentacle::tentacle_asymptote_check(&m, &tp, &by.0)? {
                row(
                    &mut t,
                    vec![
                        r.by.into(),
                        r.left.into(),
                        r.right.into(),
                        r.predicted_half_width.into(),
                        r.fitted_beta().into(),
                        tp.beta.abs().into(),
                    ],
                )?;
            }
            Ok(t)
        }
    }
}

pub fn rho(a: &SideArgs) -> Result<Table> {
    let (m, tp) = side_model(a)?;
    let mut t = table(["edge", "thread", "rho", "weighted"]);
    for d in tentacle::rho_edges(&m, &tp)? {
        row(
            &mut t,
            vec![d.edge.into(), d.thread.into(), d.rho.into(), d.weighted.into()],
        )?;
    }
    Ok(t)
}

pub fn rank1(a: &Rank1Args) -> Result<Table> {
    let (m, tp) = side_model(&a.side)?;
    let thread = match a.thread {
        Some(k) => k,
        None => tentacle::active_thread(&tentacle::rho_edges(&m, &tp)?)
            .ok_or_else(|| Error::Invalid("no thread-crossing edges".into()))?,
    };
    let r = tentacle::rank1_check(&m, &tp, thread)?;
    let mut t = table(["black", "white", "value", "u", "v", "sigma_ratio"]);
    for (i, &b) in r.blacks.iter().enumerate() {
        for (j, &w) in r.whites.iter().enumerate() {
            row(
                &mut t,
                vec![
                    b.into(),
                    w.into(),
                    r.matrix[(i, j)].into(),
                    r.u[i].into(),
                    r.v[j].into(),
                    r.ratio().into(),
                ],
            )?;
        }
    }
    Ok(t)
}

pub fn isoradial(a: &IsoradialArgs) -> Result<Table> {
    let (m, tp) = side_model(&a.side)?;
    let field = match a.field {
        Some((bx, by)) => MagneticField::new(bx, by)?,
        None => tp.field(a.gamma, a.t),
    };
    let map = tentacle::isoradial_map(&m, field)?;
    let mut t = table([
        "edge",
        "white",
        "black",
        "omega_re",
        "omega_im",
        "length",
        "max_divergence",
    ]);
    for (k, e) in m.graph().edges().iter().enumerate() {
        let w = map.omega[k];
        row(
            &mut t,
            vec![
                k.into(),
                e.white.into(),
                e.black.into(),
                w.re.into(),
                w.im.into(),
                map.length(k).into(),
                map.max_divergence.into(),
            ],
        )?;
    }
    Ok(t)
}

pub fn freeze(a: &FreezeArgs) -> Result<Table> {
    let w = a.builtin.weights()?;
    let mut t = table(["column", "threshold", "label"]);
    for (j, l) in tentacle::freeze_classify(&w, a.bx, a.tol).iter().enumerate() {
        row(&mut t, vec![j.into(), w.column_threshold(j).into(), l.as_str().into()])?;
    }
    Ok(t)
}

pub fn runlength(a: &RunlengthArgs) -> Result<Table> {
    let w = a.builtin.weights()?;
    let m = DimerModel::new(a.builtin.graph()?)?;
    let tp = tentacle::tentacle_params(&m, a.root)?;
    let column = match a.column {
        Some(j) => j,
        None => tentacle::freeze_classify(&w, tp.c, tentacle::FREEZE_TOL)
            .iter()
            .position(|l| *l == ColumnLabel::A)
            .ok_or_else(|| Error::Domain("no column is frozen to a at this tentacle".into()))?,
    };
    let law = tentacle::run_length_law(&m, &w, &tp, column, 1e-7)?;
    let mut t = table(["column", "q", "t", "p", "tail", "exact", "relative_error"]);
    for &ts in &a.t.0 {
        for p in 1..=a.max_p {
            let exact = tentacle::successive_c_probability(&m, &w, tp.field(0.0, ts), a.row, column, p)?;
            let tail = law.tail(p as u32);
            row(
                &mut t,
                vec![
                    column.into(),
                    law.q.into(),
                    ts.into(),
                    p.into(),
                    tail.into(),
                    exact.into(),
                    (exact / tail - 1.0).abs().into(),
                ],
            )?;
        }
    }
    Ok(t)
}

pub fn tentacle_check(a: &TentacleCheckArgs) -> Result<Table> {
    let (m, tp) = side_model(&a.side)?;
    let edge = match a.edge {
        Some(e) => e,
        None => tentacle::rho_edges(&m, &tp)?
            .first()
            .map(|d| d.edge)
            .ok_or_else(|| Error::Invalid("no thread-crossing edges".into()))?,
    };
    let points: Vec<(i64, f64)> =
        a.x.0
            .iter()
            .flat_map(|&x| a.xi.0.iter().map(move |&xi| (x, xi)))
            .collect();
    let rows = tentacle::tentacle_kernel_check(&m, &tp, edge, a.gamma, &a.t.0, &points)?;
    let mut t = table(["t", "x", "xi", "y", "xi_realized", "kinv", "predicted", "abs_error"]);
    for r in rows {
        row(
            &mut t,
            vec![
                r.t.into(),
                r.x.into(),
                r.xi.into(),
                r.y.into(),
                r.xi_realized.into(),
                r.kinv.into(),
                r.predicted.into(),
                r.abs_error.into(),
            ],
        )?;
    }
    Ok(t)
}
