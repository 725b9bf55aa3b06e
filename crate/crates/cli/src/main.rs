//! Command-line front end: solve moment relaxations, certify and verify
//! bounds, run conditioning/ball diagnostics, dump box-moment tables, and
//! generate the repeated-squaring counterexample family.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use momentsos::certificate::{parse_certificate, write_certificate};
use momentsos::conditioning::analyze_conditioning;
use momentsos::geometry::{
    counterexample_strict_point, gen_squaring_counterexample, inner_ball_from_strict_point,
    validate_ball,
};
use momentsos::measures::box_functional;
use momentsos::poly::count_monomials;
use momentsos::pop::{detect_explicit_bound, BitComplexity, POPInstance};
use momentsos::rational::{fmt_rat, parse_rat, pow2_floor, rat_int, rat_to_f64, sqrt_upper, Rat};
use momentsos::sdp::build_mom_sdp;
use momentsos::solver::{solve_sdp, SolveStatus, SolverConfig};
use momentsos::{extract_sos, round_certificate, verify_certificate, Error};

#[derive(Parser)]
#[command(
    name = "momentsos",
    about = "Moment-SOS relaxations with exactly verified rational certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolveOpts {
    /// Relaxation level t; defaults to ceil(deg(f)/2).
    #[arg(short, long)]
    t: Option<u32>,
    /// Target absolute duality gap for the SDP solve.
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    /// Prepend the ball constraint R^2 - sum x_i^2 with this R^2 (rational).
    #[arg(long, value_name = "R2")]
    add_ball: Option<String>,
    /// Iteration log on standard error.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the moment relaxation and report mom(f)_t.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
        /// Emit the result as CSV.
        #[arg(long)]
        csv: bool,
        /// Also write the relaxation in SDPA-like sparse text form.
        #[arg(long, value_name = "PATH")]
        export_sdpa: Option<PathBuf>,
    },
    /// Solve, extract, round, and exactly verify a certificate.
    Certify {
        instance: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
        /// Rounding step for certificate coefficients (rational, e.g. 1/1048576).
        #[arg(long, default_value = "1/1048576")]
        round_eps: String,
        /// Certificate output path; defaults to the instance path + ".cert".
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exactly re-verify a certificate file against an instance.
    Verify {
        instance: PathBuf,
        certificate: PathBuf,
    },
    /// Conditioning report and ball certificates for an instance.
    Analyze {
        instance: PathBuf,
        #[arg(short, long)]
        t: Option<u32>,
        /// Strictly feasible rational point, comma-separated (e.g. "1/2,0").
        #[arg(long)]
        point: Option<String>,
        /// Half-width of the probe box for conditioning (rational); defaults
        /// to the inscribed box of the strict-point ball.
        #[arg(long)]
        box_r: Option<String>,
        /// Prepend a ball constraint before analysis.
        #[arg(long, value_name = "R2")]
        add_ball: Option<String>,
        /// Validation sample count for ball certificates.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the exact box-measure moment table.
    Moments {
        /// Dimension (defaults to the length of --z).
        #[arg(long)]
        n: Option<usize>,
        /// Box half-width (rational).
        #[arg(long, default_value = "1")]
        r: String,
        /// Box center, comma-separated rationals.
        #[arg(long)]
        z: Option<String>,
        /// Table order 2t: all moments with |alpha| <= order.
        #[arg(long)]
        order: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit the repeated-squaring counterexample instance.
    Counterexample {
        #[arg(long)]
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}

fn exit_class(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        Error::Infeasible(_) | Error::NotExplicitlyBounded(_) => 3,
        Error::Verification(_) => 4,
        Error::Capacity { .. } => 5,
        _ => 1,
    }
}

fn read_instance(path: &Path, add_ball: &Option<String>) -> Result<POPInstance, Error> {
    let src = fs::read_to_string(path)
        .map_err(|e| Error::parse(0, 0, format!("cannot read {}: {e}", path.display())))?;
    let inst = POPInstance::parse_str(&src)?;
    match add_ball {
        Some(r2) => {
            let r2 = parse_rat(r2)?;
            Ok(inst.with_ball(r2))
        }
        None => Ok(inst),
    }
}

fn default_t(inst: &POPInstance, t: Option<u32>) -> u32 {
    t.unwrap_or_else(|| inst.objective.degree().div_ceil(2).max(1))
}

fn capacity_warning(n: usize, t: u32) {
    let count = count_monomials(n, 2 * t);
    if count > 100_000u64.into() {
        eprintln!(
            "warning: the relaxation indexes {count} monomials (n = {n}, 2t = {}); \
             expect a large SDP",
            2 * t
        );
    }
}

fn emit(output: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match output {
        Some(path) => fs::write(path, content)
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_point(s: &str) -> Result<Vec<Rat>, Error> {
    s.split(',').map(|p| parse_rat(p.trim())).collect()
}

fn sdp_shape_line(sdp: &momentsos::StandardFormSDP) -> String {
    let dims: Vec<String> = sdp.block_dims.iter().map(|d| d.to_string()).collect();
    let (norm, cons, loc, eq) = sdp.class_counts();
    format!(
        "SDP: blocks [{}], K = {} rows ({norm} normalization, {cons} consistency, \
         {loc} localizing, {eq} equality)",
        dims.join(", "),
        sdp.num_constraints()
    )
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve {
            instance,
            opts,
            csv,
            export_sdpa,
        } => {
            let inst = read_instance(&instance, &opts.add_ball)?;
            let t = default_t(&inst, opts.t);
            capacity_warning(inst.n, t);
            let sdp = build_mom_sdp(&inst, t)?;
            if let Some(path) = &export_sdpa {
                fs::write(path, sdp.to_sdpa_sparse(12))
                    .map_err(|e| Error::Invalid(format!("cannot write SDPA export: {e}")))?;
            }
            if opts.verbose {
                eprintln!("{}", sdp_shape_line(&sdp));
            }
            let cfg = SolverConfig {
                eps: opts.eps,
                verbose: opts.verbose,
                ..Default::default()
            };
            let sol = solve_sdp(&sdp, &cfg)?;
            match sol.status {
                SolveStatus::OptimalToEps => {}
                SolveStatus::InfeasibleDetected => {
                    return Err(Error::Infeasible("relaxation is infeasible".into()));
                }
                SolveStatus::MaxIter => {
                    return Err(Error::Invalid(format!(
                        "solver hit the iteration limit (gap {:.3e}); retry with a looser --eps",
                        sol.duality_gap
                    )));
                }
            }
            if csv {
                println!("t,value,dual_value,gap,iterations");
                println!(
                    "{t},{:.12e},{:.12e},{:.3e},{}",
                    sol.primal_value, sol.dual_value, sol.duality_gap, sol.iterations
                );
            } else {
                println!("mom(f)_{t} = {:.12}", sol.primal_value);
                println!(
                    "dual value = {:.12}, gap = {:.3e}, iterations = {}",
                    sol.dual_value, sol.duality_gap, sol.iterations
                );
            }
            Ok(())
        }

        Command::Certify {
            instance,
            opts,
            round_eps,
            output,
        } => {
            let inst = read_instance(&instance, &opts.add_ball)?;
            let bound = detect_explicit_bound(&inst);
            if !bound.explicitly_bounded {
                return Err(Error::NotExplicitlyBounded(
                    "certify needs the ball constraint; pass --add-ball R2".into(),
                ));
            }
            let t = default_t(&inst, opts.t);
            capacity_warning(inst.n, t);
            let round_eps = parse_rat(&round_eps)?;
            let sdp = build_mom_sdp(&inst, t)?;
            if opts.verbose {
                eprintln!("{}", sdp_shape_line(&sdp));
            }
            let cfg = SolverConfig {
                eps: opts.eps,
                verbose: opts.verbose,
                ..Default::default()
            };
            let sol = solve_sdp(&sdp, &cfg)?;
            match sol.status {
                SolveStatus::OptimalToEps => {}
                SolveStatus::InfeasibleDetected => {
                    return Err(Error::Infeasible("relaxation is infeasible".into()));
                }
                SolveStatus::MaxIter => {
                    return Err(Error::Invalid(
                        "solver hit the iteration limit; retry with a looser --eps".into(),
                    ));
                }
            }
            let cert = extract_sos(&sol, &sdp, &inst, t)?;
            let rc = round_certificate(&cert, &round_eps, &inst, t)?;
            let report = verify_certificate(&rc, &inst, t);
            if !report.pass() {
                return Err(Error::Verification(format!(
                    "self-check failed after rounding: {report:?}"
                )));
            }
            let out_path = output.unwrap_or_else(|| {
                let mut p = instance.as_os_str().to_owned();
                p.push(".cert");
                PathBuf::from(p)
            });
            fs::write(&out_path, write_certificate(&rc))
                .map_err(|e| Error::Invalid(format!("cannot write certificate: {e}")))?;
            println!("mom(f)_{t} = {:.12}", sol.primal_value);
            println!("lambda = {}", fmt_rat(&rc.base.lambda));
            println!("||E||_1 = {}", fmt_rat(&rc.l1_residual));
            println!(
                "certified bound = {} (~ {:.12})",
                fmt_rat(&rc.adjusted_bound),
                rat_to_f64(&rc.adjusted_bound)
            );
            println!("certificate written to {}", out_path.display());
            Ok(())
        }

        Command::Verify {
            instance,
            certificate,
        } => {
            let inst = read_instance(&instance, &None)?;
            let src = fs::read_to_string(&certificate).map_err(|e| {
                Error::parse(0, 0, format!("cannot read {}: {e}", certificate.display()))
            })?;
            let rc = parse_certificate(&src, inst.n)?;
            let report = verify_certificate(&rc, &inst, rc.t);
            println!(
                "identity:   {}",
                if report.identity_ok { "ok" } else { "FAIL" }
            );
            println!(
                "degrees:    {}",
                if report.degrees_ok { "ok" } else { "FAIL" }
            );
            println!(
                "membership: {}",
                if report.membership_ok { "ok" } else { "FAIL" }
            );
            if report.pass() {
                println!(
                    "certified bound = {} (~ {:.12})",
                    fmt_rat(&report.certified_bound),
                    rat_to_f64(&report.certified_bound)
                );
                Ok(())
            } else {
                if let Some(m) = &report.identity_failure {
                    println!("identity fails at monomial {:?}", m.exps());
                }
                if let Some(d) = &report.degree_failure {
                    println!("degree failure: {d}");
                }
                if let Some(m) = &report.membership_failure {
                    println!("membership failure: {m}");
                }
                Err(Error::Verification("certificate rejected".into()))
            }
        }

        Command::Analyze {
            instance,
            t,
            point,
            box_r,
            add_ball,
            samples,
            seed,
            csv,
            output,
        } => {
            let inst = read_instance(&instance, &add_ball)?;
            let t = default_t(&inst, t);
            let mut text = String::new();
            let bound = detect_explicit_bound(&inst);
            if bound.explicitly_bounded {
                text.push_str(&format!(
                    "explicitly bounded: R^2 = {} (g_{})\n",
                    fmt_rat(bound.rsq.as_ref().unwrap()),
                    bound.witness_index.unwrap() + 1
                ));
            } else {
                text.push_str("explicitly bounded: no\n");
            }
            text.push_str(&format!(
                "instance bit-complexity: {}\n",
                inst.bit_complexity()
            ));

            // Ball certificate from a strict point, validated by sampling.
            let mut center = vec![rat_int(0); inst.n];
            let mut half_width: Option<Rat> = box_r.as_deref().map(parse_rat).transpose()?;
            if let Some(p) = point {
                let x = parse_point(&p)?;
                let mut cert = inner_ball_from_strict_point(&inst, &x)?;
                validate_ball(&inst, &mut cert, samples, seed)?;
                text.push_str(&format!("inner ball: {cert}\n"));
                center = cert.center.clone();
                if half_width.is_none() {
                    // Inscribed box of the certified ball, floored to a
                    // power of two so the probe moments stay low-bit.
                    let s = sqrt_upper(&rat_int(inst.n as i64), 8);
                    half_width = Some(pow2_floor(&(cert.radius.clone() / s)));
                }
            }

            match half_width {
                Some(r) => {
                    let l = box_functional(&r, &center, 2 * t)?;
                    let report = analyze_conditioning(&l, &inst, t)?;
                    text.push_str(&format!(
                        "box functional: half-width {}, center ({})\n",
                        fmt_rat(&r),
                        center.iter().map(fmt_rat).collect::<Vec<_>>().join(", ")
                    ));
                    text.push_str(&format!(
                        "moment bit-complexity: {}\n",
                        report.moment_bit_complexity
                    ));
                    if !report.kernel_certified {
                        text.push_str(
                            "kernel analysis: not certified (instance has equality constraints)\n",
                        );
                    }
                    if csv {
                        text.push_str(&report.to_csv());
                    } else {
                        text.push_str(&report.to_table());
                    }
                    // Half the smallest certified nonzero eigenvalue bounds
                    // the inner-ball radius of the relaxation's feasible
                    // region around this functional's block matrix.
                    if let Some(min_bound) = report
                        .records
                        .iter()
                        .map(|r| r.lemma_bound.clone())
                        .min()
                    {
                        let radius = min_bound / momentsos::rational::rat_int(2);
                        text.push_str(&format!(
                            "certified SDP inner-ball radius at this functional: >= {} (~ {:.3e})\n",
                            fmt_rat(&radius),
                            rat_to_f64(&radius)
                        ));
                    }
                    if report.any_violation() {
                        return Err(Error::Verification(
                            "measured spectrum violates a certified bound".into(),
                        ));
                    }
                }
                None => {
                    text.push_str(
                        "conditioning: skipped (pass --point or --box-r to pick a probe box)\n",
                    );
                }
            }
            emit(&output, &text)
        }

        Command::Moments {
            n,
            r,
            z,
            order,
            output,
        } => {
            let z: Vec<Rat> = match (&z, n) {
                (Some(zs), _) => parse_point(zs)?,
                (None, Some(n)) => vec![rat_int(0); n],
                (None, None) => {
                    return Err(Error::Invalid("pass --n or --z".into()));
                }
            };
            if let Some(n) = n {
                if n != z.len() {
                    return Err(Error::DimensionMismatch(n, z.len()));
                }
            }
            let r = parse_rat(&r)?;
            let l = box_functional(&r, &z, order)?;
            emit(&output, &l.to_table())
        }

        Command::Counterexample { n, output } => {
            if n == 0 {
                return Err(Error::Invalid("--n must be at least 1".into()));
            }
            let inst = gen_squaring_counterexample(n);
            let mut text = inst.to_file_string();
            let strict = counterexample_strict_point(n);
            text.push_str(&format!(
                "# strictly feasible chain point: {}\n",
                strict.iter().map(fmt_rat).collect::<Vec<_>>().join(", ")
            ));
            emit(&output, &text)
        }
    }
}
