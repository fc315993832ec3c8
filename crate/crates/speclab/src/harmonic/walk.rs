//! Walk-on-spheres sampling of harmonic measure: jump to the largest
//! inscribed circle until within the absorption shell, then tally the piece
//! holding the closest boundary point. Walkers draw independent generators
//! derived from one master seed, so results are reproducible and
//! independent of the worker count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{HarmonicMeasureEstimate, MeasureMethod, PieceId, PlanarDomain};
use crate::{Error, Result};

/// Absorption shell: `10⁻⁶` of the domain diameter.
const SHELL_FACTOR: f64 = 1e-6;
/// Step cap per walker.
const STEP_CAP: usize = 100_000;

fn walker_rng(seed: u64, walker: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ walker.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs one walker; returns the absorbing boundary point and piece, or
/// `None` if the step cap was exhausted.
fn run_walker(domain: &PlanarDomain, pole: Complex64, rng: &mut ChaCha8Rng) -> Option<(Complex64, PieceId)> {
    let shell = SHELL_FACTOR * domain.diameter();
    let mut p = pole;
    for _ in 0..STEP_CAP {
        let (d, q, piece) = domain.boundary_distance(p);
        if d <= shell {
            return Some((q, piece));
        }
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        p += Complex64::from_polar(d, angle);
    }
    None
}

/// Walk-on-spheres estimate of the harmonic measure of every boundary
/// piece at `pole`, with binomial standard errors.
pub fn measure_by_walk(
    domain: &PlanarDomain,
    pole: Complex64,
    walkers: usize,
    seed: u64,
) -> Result<HarmonicMeasureEstimate> {
    if !domain.contains(pole) {
        return Err(Error::invalid(format!("pole {pole} is not interior")));
    }
    // deterministic per-walker outcomes regardless of thread scheduling
    let outcomes: Vec<Option<PieceId>> = (0..walkers as u64)
        .into_par_iter()
        .map(|w| {
            let mut rng = walker_rng(seed, w);
            run_walker(domain, pole, &mut rng).map(|(_, piece)| piece)
        })
        .collect();
    let mut counts = [0usize; 4];
    let mut unabsorbed = 0usize;
    for o in &outcomes {
        match o {
            Some(piece) => counts[*piece as usize] += 1,
            None => unabsorbed += 1,
        }
    }
    let n = walkers as f64;
    let masses: Vec<(PieceId, f64)> =
        PieceId::ALL.iter().map(|p| (*p, counts[*p as usize] as f64 / n)).collect();
    let errors: Vec<(PieceId, f64)> = masses
        .iter()
        .map(|(p, m)| (*p, (m * (1.0 - m) / n).sqrt()))
        .collect();
    Ok(HarmonicMeasureEstimate {
        domain_id: domain.id(),
        pole_re: pole.re,
        pole_im: pole.im,
        method: MeasureMethod::MonteCarlo { walkers, seed },
        masses,
        errors,
        unabsorbed,
    })
}

/// Estimate of the measure of a sub-arc (`t ∈ [t0, t1]` along a piece):
/// returns (mass, standard error, unabsorbed count).
pub fn arc_mass_by_walk(
    domain: &PlanarDomain,
    pole: Complex64,
    piece: PieceId,
    t0: f64,
    t1: f64,
    walkers: usize,
    seed: u64,
) -> Result<(f64, f64, usize)> {
    if !domain.contains(pole) {
        return Err(Error::invalid(format!("pole {pole} is not interior")));
    }
    let seg = domain.piece_segment(piece);
    let hits: Vec<Option<bool>> = (0..walkers as u64)
        .into_par_iter()
        .map(|w| {
            let mut rng = walker_rng(seed, w);
            run_walker(domain, pole, &mut rng).map(|(q, abs_piece)| {
                if abs_piece != piece {
                    return false;
                }
                let (_, _, t) = seg.closest_point(q);
                t >= t0 && (t < t1 || (t1 >= 1.0 && t <= 1.0))
            })
        })
        .collect();
    let mut inside = 0usize;
    let mut unabsorbed = 0usize;
    for h in &hits {
        match h {
            Some(true) => inside += 1,
            Some(false) => {}
            None => unabsorbed += 1,
        }
    }
    let n = walkers as f64;
    let m = inside as f64 / n;
    Ok((m, (m * (1.0 - m) / n).sqrt(), unabsorbed))
}
