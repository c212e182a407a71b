//! Subcommand implementations: problem construction, pipeline runs, CSV
//! emission, and exit-code mapping.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use infgmres::problems::{build_delay, GenericProblem, Helmholtz1dProblem, MatrixGenerator};
use infgmres::solver::{sweep, SweepOptions};
use infgmres::{
    arnoldi_build, gelfand_limit_check, observed_factor, predict_bound, spectrum_ritz,
    BasisVariant, Cx, Error as CoreError, OrthoPolicy, TaylorProblem,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{BoundArgs, Cli, Command, ConvergenceArgs, GelfandArgs, ProblemArgs, SweepArgs};

const EXIT_OK: i32 = 0;
const EXIT_CONFIG: i32 = 1;
const EXIT_UNCONVERGED: i32 = 2;
const EXIT_IO: i32 = 3;

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Sweep(args) => run_sweep(args),
        Command::Convergence(args) => run_convergence(args),
        Command::Bound(args) => run_bound(args),
        Command::Gelfand(args) => run_gelfand(args),
    }
}

fn exit_code_for(err: &CoreError) -> i32 {
    match err {
        CoreError::Io { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn fail(err: &CoreError) -> i32 {
    eprintln!("error: {err}");
    exit_code_for(err)
}

fn fail_config(message: &str) -> i32 {
    eprintln!("error: {message}");
    EXIT_CONFIG
}

fn build_problem(args: &ProblemArgs) -> Result<Box<dyn TaylorProblem>, CoreError> {
    if args.problem == "delay" {
        let n = args.n.unwrap_or(100);
        let p = build_delay(n, MatrixGenerator::Seeded { seed: args.seed }, None)?;
        Ok(Box::new(p))
    } else if args.problem == "helmholtz1d" {
        let n = args.n.unwrap_or(5000);
        Ok(Box::new(Helmholtz1dProblem::new(n)?))
    } else if let Some(path) = args.problem.strip_prefix("generic:") {
        Ok(Box::new(GenericProblem::load(Path::new(path))?))
    } else {
        Err(CoreError::ProblemDefinition(format!(
            "unknown problem '{}' (expected delay, helmholtz1d, or generic:<manifest>)",
            args.problem
        )))
    }
}

fn write_output(out: &Option<std::path::PathBuf>, csv: &str) -> Result<(), i32> {
    match out {
        None => {
            print!("{csv}");
            Ok(())
        }
        Some(path) => std::fs::write(path, csv).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_IO
        }),
    }
}

fn run_sweep(args: SweepArgs) -> i32 {
    let mus = match args.mu.values() {
        Ok(m) => m,
        Err(msg) => return fail_config(&msg),
    };
    if !args.tol.is_finite() || args.tol <= 0.0 {
        return fail_config("--tol must be positive");
    }
    if args.max_iters == 0 {
        return fail_config("--max-iters must be at least 1");
    }
    let problem = match build_problem(&args.problem) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let variant: BasisVariant = args.problem.variant.into();

    let mut csv = String::from("mu_re,mu_im,iterations,true_residual,ls_residual,converged,wall_time_s\n");
    let opts = SweepOptions {
        tol: args.tol,
        max_iters: args.max_iters,
        variant,
        ortho: OrthoPolicy::TwoPass,
        keep_histories: false,
    };
    let t0 = Instant::now();
    let result = match sweep(problem.as_ref(), &mus, &opts) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let wall = t0.elapsed().as_secs_f64();

    for (i, mu) in mus.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{},{:e},{:e},{},{:.6}",
            mu.re,
            mu.im,
            result.iterations[i],
            result.true_residuals[i],
            result.ls_residuals[i],
            result.converged[i],
            wall
        );
    }
    if let Err(code) = write_output(&args.out, &csv) {
        return code;
    }
    eprintln!(
        "sweep: {} mu values, {} Krylov iterations built, {:.3} s",
        mus.len(),
        result.iterations_used,
        wall
    );
    if result.all_converged() {
        EXIT_OK
    } else {
        eprintln!("warning: some parameter values did not reach tol = {:e}", args.tol);
        EXIT_UNCONVERGED
    }
}

fn run_convergence(args: ConvergenceArgs) -> i32 {
    let mus = match args.mu.values() {
        Ok(m) => m,
        Err(msg) => return fail_config(&msg),
    };
    if !args.tol.is_finite() || args.tol <= 0.0 {
        return fail_config("--tol must be positive");
    }
    if args.max_iters == 0 || args.spectrum_dim == 0 {
        return fail_config("--max-iters and --spectrum-dim must be at least 1");
    }
    if mus.iter().any(|m| *m == Cx::new(0.0, 0.0)) {
        return fail_config("mu = 0 has no iterative history; remove it from the grid");
    }
    let problem = match build_problem(&args.problem) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let variant: BasisVariant = args.problem.variant.into();

    let opts = SweepOptions {
        tol: args.tol,
        max_iters: args.max_iters,
        variant,
        ortho: OrthoPolicy::TwoPass,
        keep_histories: true,
    };
    let result = match sweep(problem.as_ref(), &mus, &opts) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };

    // Ritz spectrum from a dedicated factorization deep enough to settle
    // the dominant eigenvalue estimates
    let spec_fac = match arnoldi_build(
        problem.as_ref(),
        args.spectrum_dim,
        variant,
        OrthoPolicy::TwoPass,
    ) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let count = args.spectrum_dim.min(spec_fac.m());
    let spectrum = match spectrum_ritz(&spec_fac, count) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let bounds: Vec<Vec<f64>> = match mus
        .iter()
        .map(|&mu| {
            args.outliers
                .iter()
                .map(|&j| predict_bound(&spectrum, mu, j).map(|b| b.factor))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };

    let mut header = String::from("mu_re,mu_im,k,true_residual,ls_residual");
    for j in &args.outliers {
        let _ = write!(header, ",bound_j{j}");
    }
    let mut csv = header;
    csv.push('\n');
    for (i, mu) in mus.iter().enumerate() {
        let hist = &result.histories[i];
        for (k0, (tr, lr)) in hist
            .true_residuals
            .iter()
            .zip(hist.ls_residuals.iter())
            .enumerate()
        {
            let k = k0 + 1;
            let _ = write!(csv, "{},{},{},{:e},{:e}", mu.re, mu.im, k, tr, lr);
            for factors in bounds[i].iter() {
                let _ = write!(csv, ",{:e}", factors.powi(k as i32));
            }
            csv.push('\n');
        }
    }
    // summary: worst post-knee pre-convergence contraction per mu
    for (i, mu) in mus.iter().enumerate() {
        let hist = &result.histories[i];
        let upto = if result.converged[i] {
            result.iterations[i].min(hist.true_residuals.len())
        } else {
            hist.true_residuals.len()
        };
        let window = &hist.true_residuals[..upto];
        let knee = infgmres::convergence::knee_index(window).unwrap_or(0);
        let rho = observed_factor(&window[knee..])
            .map(|r| format!("{r:e}"))
            .unwrap_or_else(|_| "nan".into());
        let _ = writeln!(csv, "# rho,{},{},{}", mu.re, mu.im, rho);
    }

    if let Err(code) = write_output(&args.out, &csv) {
        return code;
    }
    if result.all_converged() {
        EXIT_OK
    } else {
        eprintln!("warning: some parameter values did not reach tol = {:e}", args.tol);
        EXIT_UNCONVERGED
    }
}

fn run_bound(args: BoundArgs) -> i32 {
    let mus = match args.mu.values() {
        Ok(m) => m,
        Err(msg) => return fail_config(&msg),
    };
    if args.spectrum_dim == 0 {
        return fail_config("--spectrum-dim must be at least 1");
    }
    let problem = match build_problem(&args.problem) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let variant: BasisVariant = args.problem.variant.into();
    let fac = match arnoldi_build(
        problem.as_ref(),
        args.spectrum_dim,
        variant,
        OrthoPolicy::TwoPass,
    ) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let spectrum = match spectrum_ritz(&fac, args.spectrum_dim.min(fac.m())) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };

    let mut csv = String::from("mu_re,mu_im,j,gamma_next_abs,factor,separation_ok\n");
    for &mu in &mus {
        for &j in &args.outliers {
            match predict_bound(&spectrum, mu, j) {
                Ok(b) => {
                    let gamma_abs = b.factor / mu.norm().max(f64::MIN_POSITIVE);
                    let _ = writeln!(
                        csv,
                        "{},{},{},{:e},{:e},{}",
                        mu.re, mu.im, j, gamma_abs, b.factor, b.separation_ok
                    );
                }
                Err(e) => return fail(&e),
            }
        }
    }
    if let Err(code) = write_output(&args.out, &csv) {
        return code;
    }
    EXIT_OK
}

fn run_gelfand(args: GelfandArgs) -> i32 {
    // built-in test matrix with prescribed spectrum and exactly known
    // condition number of the similarity
    let evals = [
        Cx::new(3.0, 0.0),
        Cx::new(2.5, 0.0),
        Cx::new(1.0, 0.0),
        Cx::new(0.5, 0.0),
        Cx::new(0.25, 0.0),
        Cx::new(0.1, 0.0),
    ];
    let n = evals.len();
    if args.outliers >= n {
        return fail_config(&format!("--outliers must be below {n}"));
    }
    if args.k_max == 0 {
        return fail_config("--k-max must be at least 1");
    }
    if !args.kappa.is_finite() || args.kappa < 1.0 {
        return fail_config("--kappa must be at least 1");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut randm = |rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |_, _| {
            Cx::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    };
    let q1 = randm(n, n).qr().q();
    let q2 = randm(n, n).qr().q();
    let sv = DVector::from_fn(n, |i, _| {
        Cx::new(args.kappa.powf(-(i as f64) / (n - 1) as f64), 0.0)
    });
    let v = &q1 * DMatrix::from_diagonal(&sv) * &q2;
    let vinv = match v.clone().try_inverse() {
        Some(inv) => inv,
        None => return fail_config("similarity factor was singular; try another seed"),
    };
    let a = &v * DMatrix::from_diagonal(&DVector::from_row_slice(&evals)) * vinv;

    let values = match gelfand_limit_check(&a, args.outliers, args.k_max) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let target = evals[args.outliers].norm();

    let mut csv = String::from("k,value,target\n");
    for (k, value) in values {
        let _ = writeln!(csv, "{k},{value:e},{target:e}");
    }
    if let Err(code) = write_output(&args.out, &csv) {
        return code;
    }
    EXIT_OK
}
