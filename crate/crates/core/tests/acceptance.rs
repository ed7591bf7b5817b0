//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use permwalk::dynamics::localisation_floor;
use permwalk::verify::{
    eigen_families, hopping_spectrum, localisation_floor_gap, marked_dip, marked_model, probability_formulas,
    propagator_vs_oracle, quartic_identity, random_times, restricted_support, spin_sector, symmetry_invariance, Check,
};
use permwalk::{OccupationState, Result, TimeGrid};

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_checks(checks: &[Check]) -> Outcome {
    Outcome {
        passed: checks.iter().all(Check::passed),
        detail: checks.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("; "),
    }
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let dev = hopping_spectrum(2..=8)?;
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        passed: dev <= 1e-9 && secs < 60.0,
        detail: format!("spectrum {{N-k, -k}} with multiplicities, N=2..8, all k: max eigenvalue error {dev:.3e} (<= 1e-9), {secs:.2}s (< 60s)"),
    })
}

fn criterion_2() -> Result<Outcome> {
    let dev = propagator_vs_oracle(2..=12, &random_times(50, 20.0, 2024))?;
    Ok(Outcome {
        passed: dev < 1e-11,
        detail: format!("1-fermion propagator vs oracle, N=2..12, 50 random times: {dev:.3e} (< 1e-11)"),
    })
}

fn criterion_3() -> Result<Outcome> {
    let grid = TimeGrid::new(0.0, 10.0, 100)?;
    let checks = probability_formulas(2..=8, &grid, 1e-10)?;
    Ok(from_checks(&checks))
}

fn criterion_4() -> Result<Outcome> {
    let cases: Vec<(usize, usize)> = (2..=8).flat_map(|n| (1..n).map(move |k| (n, k))).chain([(100, 1)]).collect();
    let gap = localisation_floor_gap(cases);
    let floor = localisation_floor::<f64>(100, 1);
    Ok(Outcome {
        passed: gap <= 1e-12 && floor >= 0.96,
        detail: format!(
            "min_t return probability vs ((N-2k)/N)^2: {gap:.3e} (<= 1e-12); N=100, k=1 floor {floor:.4} (>= 0.96)"
        ),
    })
}

fn criterion_5() -> Result<Outcome> {
    let start = OccupationState::from_sites(&[5, 6], 10)?;
    let (symmetric, ring) = restricted_support(&start, &TimeGrid::new(0.0, 20.0, 400)?)?;
    Ok(Outcome {
        passed: symmetric < 1e-10 && ring > 0.01,
        detail: format!(
            "N=10, k=2 from |5,6>, t in [0,20]: symmetric leak {symmetric:.3e} (< 1e-10), ring leak {ring:.3e} (> 0.01)"
        ),
    })
}

fn criterion_6() -> Result<Outcome> {
    Ok(from_checks(&quartic_identity(4..=6, &[0.5, 1.0, 2.0])?))
}

fn criterion_7() -> Result<Outcome> {
    Ok(from_checks(&symmetry_invariance(2..=7, 30, 99)?))
}

fn criterion_8() -> Result<Outcome> {
    let grid = TimeGrid::new(0.0, 10.0, 100)?;
    let mut checks = marked_model(3..=10, &[0.0, 0.05, 0.3, 1.0], &grid)?;
    let (seen, bound) = marked_dip(4, 0.05, &TimeGrid::new(0.0, 20.0, 4000)?)?;
    checks.push(Check::at_most("N=4, β=0.05 dip, closed form", bound, 0.0075));
    checks.push(Check::at_most("N=4, β=0.05 dip, oracle", seen, 0.0075));
    Ok(from_checks(&checks))
}

fn criterion_9() -> Result<Outcome> {
    Ok(from_checks(&spin_sector(3..=8, 4)?))
}

fn criterion_10() -> Result<Outcome> {
    Ok(from_checks(&eigen_families(2..=7)?))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("spectrum reproduction", criterion_1),
        ("closed-form propagator", criterion_2),
        ("probability formulas", criterion_3),
        ("localisation floor", criterion_4),
        ("restricted support", criterion_5),
        ("quartic identity and stability", criterion_6),
        ("symmetry invariance", criterion_7),
        ("marked model", criterion_8),
        ("spin sector", criterion_9),
        ("eigenvector families", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run().unwrap_or_else(|e| Outcome { passed: false, detail: format!("error: {e}") });
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{status} criterion {} ({name}): {}", i + 1, outcome.detail);
        if !outcome.passed {
            failures += 1;
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
