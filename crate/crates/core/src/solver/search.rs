//! Shared machinery: enumerate witness mixtures, collect what each justifies,
//! and merge chunk results in a fixed order.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::model::{gauss_justify, GameSpec, GaussPlayer, Moments, PlayerEval};

use super::policy::{compositions, dirichlet_draws, simplex_candidate_count, subsets, MAX_CANDIDATES};
use super::survivors::{for_each_product, SurvivorSet};
use super::witness::{WitnessBook, WitnessSigma};
use super::{SigmaSearchPolicy, SolverError};

const POINT_CHUNK: usize = 2048;
const SEGMENT_SAMPLES: usize = 64;
const BISECT_WIDTH: f64 = 1e-12;

/// Whether one witness must justify the whole profile or each player picks
/// their own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Common,
    PerPlayer,
}

pub(crate) struct Ctx<'a> {
    pub game: &'a GameSpec,
    pub evals: Vec<PlayerEval<'a>>,
    pub tol: f64,
    pub mode: Mode,
}

impl<'a> Ctx<'a> {
    pub fn new(game: &'a GameSpec, tol: f64, mode: Mode) -> Result<Self, SolverError> {
        Ok(Self {
            game,
            evals: PlayerEval::all(game)?,
            tol,
            mode,
        })
    }

    fn gauss(&self) -> Option<Vec<&GaussPlayer<'a>>> {
        self.evals
            .iter()
            .map(|e| match e {
                PlayerEval::Gauss(g) => Some(g),
                PlayerEval::Tab(_) => None,
            })
            .collect()
    }

    fn sets_for(&self, sigma: &[(usize, f64)]) -> Result<Vec<Vec<usize>>, SolverError> {
        self.evals
            .iter()
            .map(|e| Ok(e.justify(sigma, self.tol)?.actions()))
            .collect()
    }
}

/// Results of one chunk of work, with chunk-local witness indices.
#[derive(Default)]
pub(crate) struct Partial {
    sigmas: Vec<WitnessSigma>,
    found: HashMap<usize, u32>,
    actions: Vec<Vec<Option<u32>>>,
}

impl Partial {
    pub(crate) fn new(game: &GameSpec) -> Self {
        Self {
            sigmas: Vec::new(),
            found: HashMap::new(),
            actions: game.grid().dims().iter().map(|&d| vec![None; d]).collect(),
        }
    }

    pub(crate) fn record(&mut self, ctx: &Ctx<'_>, sigma: impl FnOnce() -> WitnessSigma, sets: &[Vec<usize>]) {
        let mut sigma = Some(sigma);
        let mut id = None;
        let sigmas = &mut self.sigmas;
        let mut get_id = || {
            *id.get_or_insert_with(|| {
                sigmas.push((sigma.take().expect("sigma built once"))());
                (sigmas.len() - 1) as u32
            })
        };
        match ctx.mode {
            Mode::Common => {
                let grid = ctx.game.grid();
                let found = &mut self.found;
                for_each_product(sets, |coords| {
                    found.entry(grid.encode(coords)).or_insert_with(&mut get_id);
                });
            }
            Mode::PerPlayer => {
                for (i, set) in sets.iter().enumerate() {
                    for &x in set {
                        if self.actions[i][x].is_none() {
                            self.actions[i][x] = Some(get_id());
                        }
                    }
                }
            }
        }
    }
}

/// Merges chunk results in order; earlier chunks win witness ties.
pub(crate) fn merge(game: &GameSpec, mode: Mode, parts: Vec<Partial>) -> (SurvivorSet, WitnessBook) {
    let n = game.n_profiles();
    let mut book = WitnessBook {
        actions: game.grid().dims().iter().map(|&d| vec![None; d]).collect(),
        ..Default::default()
    };
    let mut survivors = SurvivorSet::empty(n);
    for part in parts {
        let mut remap: Vec<Option<u32>> = vec![None; part.sigmas.len()];
        let mut global = |w: u32, book: &mut WitnessBook| -> u32 {
            *remap[w as usize].get_or_insert_with(|| {
                book.sigmas.push(part.sigmas[w as usize].clone());
                (book.sigmas.len() - 1) as u32
            })
        };
        match mode {
            Mode::Common => {
                let mut found: Vec<(usize, u32)> = part.found.into_iter().collect();
                found.sort_unstable();
                for (p, w) in found {
                    if !survivors.contains(p) {
                        survivors.insert(p);
                        let g = global(w, &mut book);
                        book.profiles.push((p, g));
                    }
                }
            }
            Mode::PerPlayer => {
                for (i, row) in part.actions.iter().enumerate() {
                    for (x, w) in row.iter().enumerate() {
                        if let (Some(w), None) = (w, book.actions[i][x]) {
                            book.actions[i][x] = Some(global(*w, &mut book));
                        }
                    }
                }
            }
        }
    }
    match mode {
        Mode::Common => book.profiles.sort_unstable(),
        Mode::PerPlayer => {
            let sets: Vec<Vec<usize>> = book
                .actions
                .iter()
                .map(|row| (0..row.len()).filter(|&x| row[x].is_some()).collect())
                .collect();
            survivors = SurvivorSet::from_product(game.grid(), &sets);
        }
    }
    (survivors, book)
}

enum Work {
    Points(Vec<usize>),
    Mixtures(Vec<Vec<(usize, f64)>>),
    Subset(Vec<usize>),
    Segment(usize, usize),
}

/// Runs an enumerating policy over witnesses supported in `a`.
pub(crate) fn run_enumeration(
    ctx: &Ctx<'_>,
    a: &SurvivorSet,
    policy: &SigmaSearchPolicy,
) -> Result<(SurvivorSet, WitnessBook), SolverError> {
    let profiles = a.to_vec();
    let mut works: Vec<Work> = Vec::new();
    let mut comps: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut units = 1;
    match *policy {
        SigmaSearchPolicy::SimplexGrid { mesh, max_support } => {
            let count = simplex_candidate_count(profiles.len(), mesh, max_support);
            if count > MAX_CANDIDATES {
                return Err(SolverError::SearchTooLarge { candidates: count });
            }
            units = mesh - 1;
            let top = max_support.min(profiles.len()).min(units);
            comps = (0..=top).map(|j| compositions(units, j)).collect();
            for j in 1..=top {
                works.extend(subsets(&profiles, j).into_iter().map(Work::Subset));
            }
        }
        SigmaSearchPolicy::DirichletSample { count, seed } => {
            works.extend(profiles.chunks(POINT_CHUNK).map(|c| Work::Points(c.to_vec())));
            let draws = dirichlet_draws(&profiles, count, seed);
            works.extend(draws.chunks(256).map(|c| Work::Mixtures(c.to_vec())));
        }
        SigmaSearchPolicy::StructuredMoments => {
            let gauss = ctx.gauss().ok_or_else(|| {
                SolverError::PolicyNotApplicable("structured search needs linear-Gaussian players".into())
            })?;
            works.extend(profiles.chunks(POINT_CHUNK).map(|c| Work::Points(c.to_vec())));
            let anchors = anchors(&gauss, &profiles);
            for (k, &p) in anchors.iter().enumerate() {
                for &q in &anchors[k + 1..] {
                    works.push(Work::Segment(p, q));
                }
            }
        }
        SigmaSearchPolicy::LinearProgram => unreachable!("handled by the LP module"),
    }
    let parts: Vec<Partial> = works
        .par_iter()
        .map(|w| process(ctx, w, &comps, units))
        .collect::<Result<_, _>>()?;
    Ok(merge(ctx.game, ctx.mode, parts))
}

fn process(ctx: &Ctx<'_>, work: &Work, comps: &[Vec<Vec<usize>>], units: usize) -> Result<Partial, SolverError> {
    let mut part = Partial::new(ctx.game);
    let n = ctx.game.n_profiles();
    match work {
        Work::Points(ps) => {
            for &p in ps {
                let sigma = [(p, 1.0)];
                let sets = ctx.sets_for(&sigma)?;
                part.record(ctx, || WitnessSigma::Point { profile: p }, &sets);
            }
        }
        Work::Mixtures(ms) => {
            for m in ms {
                let sets = ctx.sets_for(m)?;
                part.record(ctx, || WitnessSigma::from_pairs(m, n).expect("valid draw"), &sets);
            }
        }
        Work::Subset(sub) => {
            for comp in &comps[sub.len()] {
                let sigma: Vec<(usize, f64)> = sub
                    .iter()
                    .zip(comp)
                    .map(|(&p, &c)| (p, c as f64 / units as f64))
                    .collect();
                let sets = ctx.sets_for(&sigma)?;
                part.record(ctx, || WitnessSigma::from_pairs(&sigma, n).expect("valid mesh point"), &sets);
            }
        }
        Work::Segment(p, q) => {
            let gauss = ctx.gauss().expect("checked before dispatch");
            segment(ctx, &gauss, *p, *q, &mut part);
        }
    }
    Ok(part)
}

/// Extreme profiles of `a` for each player's point fit, interaction term and
/// perceived marginal return.
fn anchors(gauss: &[&GaussPlayer<'_>], profiles: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    for g in gauss {
        let mut ext = [[(f64::INFINITY, 0usize), (f64::NEG_INFINITY, 0usize)]; 3];
        for &p in profiles {
            let m = g.point_moments(p);
            let hat = m.theta_hat().unwrap_or(0.0);
            let vals = [hat, m.eg, hat * m.eg];
            for (e, v) in ext.iter_mut().zip(vals) {
                if v < e[0].0 {
                    e[0] = (v, p);
                }
                if v > e[1].0 {
                    e[1] = (v, p);
                }
            }
        }
        for e in ext {
            out.push(e[0].1);
            out.push(e[1].1);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Walks the segment `(1 - t) p + t q`, recording every distinct set of
/// justified actions found by uniform sampling refined with bisection.
fn segment(ctx: &Ctx<'_>, gauss: &[&GaussPlayer<'_>], p: usize, q: usize, part: &mut Partial) {
    let mp: Vec<Moments> = gauss.iter().map(|g| g.point_moments(p)).collect();
    let mq: Vec<Moments> = gauss.iter().map(|g| g.point_moments(q)).collect();
    let sig = |t: f64| -> Vec<Vec<usize>> {
        gauss
            .iter()
            .zip(mp.iter().zip(&mq))
            .map(|(g, (a, b))| gauss_justify(g, &a.lerp(b, t), ctx.tol).actions())
            .collect()
    };
    let emit = |t: f64, s: &Vec<Vec<usize>>, part: &mut Partial| {
        part.record(
            ctx,
            || match t {
                0.0 => WitnessSigma::Point { profile: p },
                1.0 => WitnessSigma::Point { profile: q },
                _ => WitnessSigma::Pair { first: p, second: q, t },
            },
            s,
        )
    };
    let ts: Vec<f64> = (0..=SEGMENT_SAMPLES).map(|k| k as f64 / SEGMENT_SAMPLES as f64).collect();
    let sigs: Vec<Vec<Vec<usize>>> = ts.iter().map(|&t| sig(t)).collect();
    for k in 0..ts.len() {
        emit(ts[k], &sigs[k], part);
        if k + 1 < ts.len() && sigs[k] != sigs[k + 1] {
            let mut stack = vec![(ts[k], sigs[k].clone(), ts[k + 1], sigs[k + 1].clone())];
            while let Some((lo, slo, hi, shi)) = stack.pop() {
                if hi - lo < BISECT_WIDTH {
                    continue;
                }
                let mid = 0.5 * (lo + hi);
                let smid = sig(mid);
                if smid != slo && smid != shi {
                    emit(mid, &smid, part);
                }
                if smid != slo {
                    stack.push((lo, slo, mid, smid.clone()));
                }
                if smid != shi {
                    stack.push((mid, smid, hi, shi));
                }
            }
        }
    }
}
