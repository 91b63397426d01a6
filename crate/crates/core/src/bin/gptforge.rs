use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde_json::json;

use gptforge::embed::{
    check_embedding_dimension, embed_test, reduce_certificate, verify_certificate, Certificate, EmbedOptions,
    EmbedOutcome, EmbeddingProblem,
};
use gptforge::frames::{build_frame, positivity_report, represent_effect, represent_state, FrameModel};
use gptforge::quantum::random_frame_witnesses;
use gptforge::quotient::{check_congruence, check_unique_deterministic_effect, quotient, Signature};
use gptforge::report::{CertificateRef, InputHash, RunReport};
use gptforge::schema::{
    parse, to_canonical, CertificateDoc, FragmentDoc, FrameDoc, StatsTableDoc, TomlocDoc, CERTIFICATE_V1,
    FRAGMENT_V1, FRAME_V1, REPORT_V1, STATSTABLE_V1, TOMLOC_V1,
};
use gptforge::tomo::tomographic_locality_check;
use gptforge::zoo;
use gptforge::{Error, GptFragment, Result, DEFAULT_TOL};

#[derive(Parser)]
#[command(name = "gptforge", version, about = "GPT fragments, frame models and simplex-embedding certificates")]
struct Cli {
    /// Numerical tolerance.
    #[arg(long, global = true, env = "GPTFORGE_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for commands that process independent items.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Write a report.v1 document to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Write the main output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quotient a statstable.v1 table into a fragment.v1 GPT fragment.
    Quotient { input: PathBuf },
    /// Tomographic locality by dimension counting.
    Tomloc {
        /// A tomloc.v1 document.
        input: Option<PathBuf>,
        /// dim_a dim_b dim_joint
        #[arg(long, num_args = 3, conflicts_with = "input")]
        dims: Option<Vec<u64>>,
    },
    /// Build, apply, verify or sample frames.
    Frame {
        #[command(subcommand)]
        cmd: FrameCmd,
    },
    /// Simplex-embedding test of a fragment.v1; writes certificate.v1.
    Embed {
        input: PathBuf,
        /// System to test; defaults to the only system with cone data.
        #[arg(long)]
        system: Option<String>,
        /// Solve in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        /// Reduce a feasible certificate toward the span dimension.
        #[arg(long)]
        reduce: bool,
        /// Requested number of ontic states; rejected below the span dimension.
        #[arg(long)]
        ontic: Option<usize>,
    },
    /// Re-check a certificate.v1 against a fragment.v1.
    Verify {
        certificate: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
    },
    /// Built-in models.
    Zoo {
        #[command(subcommand)]
        cmd: ZooCmd,
    },
    /// Re-check report.v1 documents: input hashes and verdicts.
    Report { inputs: Vec<PathBuf> },
}

#[derive(Subcommand)]
enum FrameCmd {
    /// Check a frame.v1 document and emit it with its inverse recomputed.
    Build { input: PathBuf },
    /// Represent one vector (or effect covector) in a frame.
    Apply {
        frame: PathBuf,
        /// Comma-separated GPT coordinates.
        #[arg(long, conflicts_with_all = ["fragment", "label"])]
        vector: Option<String>,
        /// Take the vector from this fragment.v1 ...
        #[arg(long, requires = "label")]
        fragment: Option<PathBuf>,
        /// ... by state (or effect) label.
        #[arg(long)]
        label: Option<String>,
        /// Treat the input as an effect.
        #[arg(long)]
        effect: bool,
    },
    /// Positivity of a frame on every process of a fragment.
    Verify {
        frame: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
        /// Fragment system the frame applies to.
        #[arg(long)]
        system: Option<String>,
        /// Ignore the fragment's transformations.
        #[arg(long)]
        prepare_measure: bool,
    },
    /// Sample random exact frames and count the positive ones.
    Sample {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Hilbert-space dimension.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

#[derive(Subcommand)]
enum ZooCmd {
    List,
    Emit {
        name: String,
        /// Dimension parameter where the model has one.
        #[arg(long)]
        dim: Option<usize>,
        /// Emit the statistics table instead of the fragment.
        #[arg(long)]
        stats: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Answer {
    Yes,
    No,
}

struct Ctx {
    tol: f64,
    seed: u64,
    jobs: usize,
    output: Option<PathBuf>,
    report: RunReport,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        self.report.inputs.push(InputHash::of_bytes(path.display().to_string(), &bytes));
        String::from_utf8(bytes).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(p) => std::fs::write(p, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Quotient { .. } => "quotient",
        Cmd::Tomloc { .. } => "tomloc",
        Cmd::Frame { cmd } => match cmd {
            FrameCmd::Build { .. } => "frame build",
            FrameCmd::Apply { .. } => "frame apply",
            FrameCmd::Verify { .. } => "frame verify",
            FrameCmd::Sample { .. } => "frame sample",
        },
        Cmd::Embed { .. } => "embed",
        Cmd::Verify { .. } => "verify",
        Cmd::Zoo { cmd } => match cmd {
            ZooCmd::List => "zoo list",
            ZooCmd::Emit { .. } => "zoo emit",
        },
        Cmd::Report { .. } => "report",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let name = command_name(&cli.cmd);
    let mut ctx = Ctx {
        tol: cli.tol,
        seed: cli.seed,
        jobs: cli.jobs.max(1),
        output: cli.output.clone(),
        report: RunReport::new(name, cli.tol),
    };
    let result = if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        Err(Error::Invalid(format!("tolerance must be positive, got {}", cli.tol)))
    } else {
        run(&cli.cmd, &mut ctx)
    };
    let code = match &result {
        Ok(Answer::Yes) => 0,
        Ok(Answer::No) => 3,
        Err(e) => {
            eprintln!("error: {e}");
            ctx.report.verdict(name, false, format!("error: {e}"));
            2
        }
    };
    ctx.report.finish(started);
    if let Some(path) = &cli.report {
        let written = to_canonical(&ctx.report).and_then(|t| Ok(std::fs::write(path, t)?));
        if let Err(e) = written {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}

fn run(cmd: &Cmd, ctx: &mut Ctx) -> Result<Answer> {
    match cmd {
        Cmd::Quotient { input } => cmd_quotient(ctx, input),
        Cmd::Tomloc { input, dims } => cmd_tomloc(ctx, input.as_deref(), dims.as_deref()),
        Cmd::Frame { cmd } => match cmd {
            FrameCmd::Build { input } => cmd_frame_build(ctx, input),
            FrameCmd::Apply {
                frame,
                vector,
                fragment,
                label,
                effect,
            } => cmd_frame_apply(ctx, frame, vector.as_deref(), fragment.as_deref(), label.as_deref(), *effect),
            FrameCmd::Verify {
                frame,
                fragment,
                system,
                prepare_measure,
            } => cmd_frame_verify(ctx, frame, fragment, system.as_deref(), *prepare_measure),
            FrameCmd::Sample { count, dim } => cmd_frame_sample(ctx, *count, *dim),
        },
        Cmd::Embed {
            input,
            system,
            exact,
            reduce,
            ontic,
        } => cmd_embed(ctx, input, system.as_deref(), *exact, *reduce, *ontic),
        Cmd::Verify { certificate, fragment } => cmd_verify(ctx, certificate, fragment),
        Cmd::Zoo { cmd } => match cmd {
            ZooCmd::List => {
                let mut text = String::new();
                for m in zoo::MODELS {
                    text.push_str(&format!("{:<22} {}\n", m.name, m.summary));
                }
                ctx.emit(&text)?;
                Ok(Answer::Yes)
            }
            ZooCmd::Emit { name, dim, stats } => {
                let item = zoo::emit(name, *dim, *stats)?;
                ctx.emit(&item.to_json()?)?;
                ctx.report.verdict("zoo emit", true, name.clone());
                Ok(Answer::Yes)
            }
        },
        Cmd::Report { inputs } => cmd_report(ctx, inputs),
    }
}

fn read_fragment(ctx: &mut Ctx, path: &Path) -> Result<GptFragment> {
    let text = ctx.read(path)?;
    parse::<FragmentDoc>(&text, FRAGMENT_V1)?.to_fragment()
}

fn cmd_quotient(ctx: &mut Ctx, input: &Path) -> Result<Answer> {
    let text = ctx.read(input)?;
    let table = parse::<StatsTableDoc>(&text, STATSTABLE_V1)?.to_table()?;
    if !table.deterministic_effect_ids.is_empty() {
        let det = check_unique_deterministic_effect(&table, ctx.tol)?;
        let detail = match &det.offending {
            None => "deterministic effects agree".to_string(),
            Some((a, b, d)) => format!("`{a}` and `{b}` differ by {d:.3e}"),
        };
        ctx.report.verdict("check_unique_deterministic_effect", det.unique, detail);
    }
    let q = quotient(&table, ctx.tol)?;
    let count = |f: fn(&Signature) -> bool| q.classes.count(f);
    ctx.report.verdict(
        "quotient",
        true,
        format!(
            "{} procedures -> {} state, {} effect, {} transformation classes",
            table.procedures.len(),
            count(|s| matches!(s, Signature::Preparation { .. })),
            count(|s| matches!(s, Signature::Effect { .. })),
            count(|s| matches!(s, Signature::Transformation { .. })),
        ),
    );
    let cong = check_congruence(&table, &q, ctx.tol)?;
    if !cong.checks.is_empty() {
        ctx.report.verdict(
            "check_congruence",
            cong.pass,
            format!("{} wired procedures, max deviation {:.3e}", cong.checks.len(), cong.max_deviation),
        );
        ctx.report.residual("congruence", cong.max_deviation);
    }
    ctx.emit(&to_canonical(&FragmentDoc::from_fragment(&q.fragment))?)?;
    Ok(if ctx.report.all_pass() { Answer::Yes } else { Answer::No })
}

fn cmd_tomloc(ctx: &mut Ctx, input: Option<&Path>, dims: Option<&[u64]>) -> Result<Answer> {
    let (a, b, j, name) = match (input, dims) {
        (Some(p), None) => {
            let text = ctx.read(p)?;
            let doc: TomlocDoc = parse(&text, TOMLOC_V1)?;
            (doc.dim_a, doc.dim_b, doc.dim_joint, doc.name)
        }
        (None, Some(d)) => (d[0], d[1], d[2], "command line".to_string()),
        _ => return Err(Error::Invalid("give a tomloc.v1 file or --dims A B JOINT".into())),
    };
    let v = tomographic_locality_check(a, b, j);
    ctx.report.verdict(
        "tomographic_locality_check",
        v.tomographically_local,
        format!("{name}: {a} x {b} = {} local vs {j} joint parameters", v.local_parameters),
    );
    ctx.emit(&to_canonical(&json!({
        "name": name,
        "tomographically_local": v.tomographically_local,
        "local_parameters": v.local_parameters,
        "joint_parameters": v.joint_parameters,
        "deficit": v.deficit,
    }))?)?;
    Ok(if v.tomographically_local { Answer::Yes } else { Answer::No })
}

fn cmd_frame_build(ctx: &mut Ctx, input: &Path) -> Result<Answer> {
    let text = ctx.read(input)?;
    let doc: FrameDoc = parse(&text, FRAME_V1)?;
    let (spec, entry, check) = doc.to_entry(ctx.tol)?;
    let pass = check.passes(ctx.tol);
    ctx.report.verdict(
        "build_frame",
        pass,
        format!("{} ontic states, dimension {}, exact {}", entry.n(), entry.dim(), entry.exact),
    );
    ctx.report.residual("normalization", check.normalization);
    ctx.report.residual("reconstruction", check.reconstruction);
    if let Some(r) = check.biorthogonality {
        ctx.report.residual("biorthogonality", r);
    }
    if let Some(r) = check.frame_unit {
        ctx.report.residual("frame_unit", r);
    }
    if let Some(c) = check.cond {
        ctx.report.residual("condition", c);
    }
    ctx.emit(&to_canonical(&FrameDoc::from_entry(&spec, &entry))?)?;
    Ok(if pass { Answer::Yes } else { Answer::No })
}

fn cmd_frame_apply(
    ctx: &mut Ctx,
    frame: &Path,
    vector: Option<&str>,
    fragment: Option<&Path>,
    label: Option<&str>,
    effect: bool,
) -> Result<Answer> {
    let text = ctx.read(frame)?;
    let (spec, entry, _) = parse::<FrameDoc>(&text, FRAME_V1)?.to_entry(ctx.tol)?;
    let v: DVector<f64> = match (vector, fragment, label) {
        (Some(s), _, _) => {
            let xs = s
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Invalid(format!("`{x}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            DVector::from_vec(xs)
        }
        (None, Some(p), Some(l)) => {
            let f = read_fragment(ctx, p)?;
            if effect {
                f.effects.iter().find(|e| e.label == l).map(|e| e.covec.clone())
            } else {
                f.states.iter().find(|s| s.label == l).map(|s| s.vec.clone())
            }
            .ok_or_else(|| Error::Invalid(format!("no {} labelled `{l}`", if effect { "effect" } else { "state" })))?
        }
        _ => return Err(Error::Invalid("give --vector or --fragment with --label".into())),
    };
    let labels = entry.ontic.labels.clone();
    let model = FrameModel::single(entry);
    let values = if effect {
        represent_effect(&model, &spec.id, &v)?
    } else {
        represent_state(&model, &spec.id, &v)?
    };
    let min = values.min();
    ctx.report.verdict("represent", true, format!("min entry {min:.3e}"));
    ctx.emit(&to_canonical(&json!({
        "labels": labels,
        "values": values.iter().cloned().collect::<Vec<_>>(),
        "min": min,
    }))?)?;
    Ok(Answer::Yes)
}

fn cmd_frame_verify(
    ctx: &mut Ctx,
    frame: &Path,
    fragment: &Path,
    system: Option<&str>,
    prepare_measure: bool,
) -> Result<Answer> {
    let text = ctx.read(frame)?;
    let doc: FrameDoc = parse(&text, FRAME_V1)?;
    let mut frag = read_fragment(ctx, fragment)?;
    if prepare_measure {
        frag = frag.prepare_measure();
    }
    let sys_id = match system {
        Some(s) => s.to_string(),
        None if frag.systems.get(&doc.system.id).is_ok() => doc.system.id.clone(),
        None => {
            let same: Vec<_> = frag.systems.iter().filter(|s| s.dim == doc.system.dim).collect();
            match same.as_slice() {
                [one] => one.id.clone(),
                _ => return Err(Error::Invalid("cannot tell which fragment system the frame is for; use --system".into())),
            }
        }
    };
    let spec = frag.systems.get(&sys_id)?;
    let rows = doc.labels.len();
    let chi = nalgebra::DMatrix::from_row_slice(rows, spec.dim, &doc.chi);
    let (entry, _) = build_frame(&spec, doc.labels.clone(), chi, ctx.tol, doc.overcomplete)?;
    // only the chosen system's processes are represented
    frag.states.retain(|s| s.system.id == sys_id);
    frag.effects.retain(|e| e.system.id == sys_id);
    frag.transformations
        .retain(|t| t.in_system.id == sys_id && t.out_system.id == sys_id);
    let rep = positivity_report(&FrameModel::single(entry), &frag, ctx.tol)?;
    ctx.report.verdict(
        "positivity_report",
        rep.positive,
        format!(
            "{} processes, min entry {:.3e}{}",
            rep.processes.len(),
            rep.min_entry,
            rep.witness.as_ref().map(|w| format!(" at `{w}`")).unwrap_or_default()
        ),
    );
    ctx.report.residual("min_entry", rep.min_entry);
    ctx.emit(&to_canonical(&json!({
        "positive": rep.positive,
        "quasistochastic": rep.quasistochastic,
        "min_entry": rep.min_entry,
        "witness": rep.witness,
        "processes": rep.processes.len(),
    }))?)?;
    Ok(if rep.positive { Answer::Yes } else { Answer::No })
}

fn cmd_frame_sample(ctx: &mut Ctx, count: usize, dim: usize) -> Result<Answer> {
    let w = random_frame_witnesses(dim, count, ctx.seed, ctx.jobs)?;
    let positive = w.iter().filter(|x| **x >= -ctx.tol).count();
    let max = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ctx.report.seed = Some(ctx.seed);
    ctx.report.verdict(
        "frame_positivity_witness",
        true,
        format!("{positive} of {count} sampled frames positive"),
    );
    ctx.report.residual("max_witness", max);
    ctx.emit(&to_canonical(&json!({
        "count": count,
        "dim": dim,
        "seed": ctx.seed,
        "positive": positive,
        "positive_fraction": if count == 0 { 0.0 } else { positive as f64 / count as f64 },
        "max_witness": if count == 0 { 0.0 } else { max },
    }))?)?;
    Ok(Answer::Yes)
}

fn pick_system(frag: &GptFragment, system: Option<&str>) -> Result<String> {
    if let Some(s) = system {
        return Ok(s.to_string());
    }
    let with_cones: Vec<&String> = frag
        .state_cone_rays
        .keys()
        .filter(|k| frag.effect_cone_rays.contains_key(*k))
        .collect();
    match with_cones.as_slice() {
        [one] => Ok((*one).clone()),
        [] => Err(Error::Invalid("fragment has no system with both cone descriptions".into())),
        _ => Err(Error::Invalid("several systems have cone data; use --system".into())),
    }
}

fn cmd_embed(
    ctx: &mut Ctx,
    input: &Path,
    system: Option<&str>,
    exact: bool,
    reduce: bool,
    ontic: Option<usize>,
) -> Result<Answer> {
    let frag = read_fragment(ctx, input)?;
    let sys = pick_system(&frag, system)?;
    if let Some(n) = ontic {
        check_embedding_dimension(n, &frag, &sys, ctx.tol)?;
    }
    let out = embed_test(&frag, &sys, EmbedOptions { tol: ctx.tol, exact })?;
    let cert = match out {
        EmbedOutcome::Feasible(c) if reduce => {
            let k = EmbeddingProblem::from_fragment(&frag, &sys, ctx.tol)?.span_dim();
            let r = reduce_certificate(&c, k, ctx.tol);
            ctx.report.verdict(
                "reduce_certificate",
                r.achieved_count == k,
                format!("{} -> {} terms (target {k})", r.initial_count, r.achieved_count),
            );
            Certificate::Embedding(r.certificate)
        }
        other => other.certificate(),
    };
    let check = verify_certificate(&cert, &frag, ctx.tol)?;
    if !check.valid {
        return Err(Error::Lp(format!("certificate failed verification: {}", check.failures.join("; "))));
    }
    let feasible = matches!(cert, Certificate::Embedding(_));
    let detail = match &cert {
        Certificate::Embedding(c) => format!("`{sys}` embeds with {} terms", c.ontic_count),
        Certificate::Farkas(y) => format!("`{sys}` does not embed; Farkas gap {:.3e}", y.gap),
    };
    ctx.report.verdict("embed_test", feasible, detail);
    ctx.report.verdict("verify_certificate", true, "certificate re-checked");
    ctx.report.residual("certificate", check.residual);
    let doc = CertificateDoc::from_certificate(&cert);
    let text = to_canonical(&doc)?;
    ctx.report.certificates.push(match &ctx.output {
        Some(p) => CertificateRef {
            path: Some(p.display().to_string()),
            embedded: None,
        },
        None => CertificateRef {
            path: None,
            embedded: Some(serde_json::to_value(&doc)?),
        },
    });
    ctx.emit(&text)?;
    Ok(if feasible { Answer::Yes } else { Answer::No })
}

fn cmd_verify(ctx: &mut Ctx, certificate: &Path, fragment: &Path) -> Result<Answer> {
    let text = ctx.read(certificate)?;
    let cert = parse::<CertificateDoc>(&text, CERTIFICATE_V1)?.to_certificate()?;
    let frag = read_fragment(ctx, fragment)?;
    let check = verify_certificate(&cert, &frag, ctx.tol)?;
    let kind = match cert {
        Certificate::Embedding(_) => "embedding",
        Certificate::Farkas(_) => "farkas",
    };
    ctx.report.verdict(
        "verify_certificate",
        check.valid,
        if check.valid {
            format!("{kind} certificate valid")
        } else {
            check.failures.join("; ")
        },
    );
    ctx.report.residual("certificate", check.residual);
    ctx.emit(&to_canonical(&json!({
        "kind": kind,
        "valid": check.valid,
        "failures": check.failures,
        "residual": check.residual,
    }))?)?;
    Ok(if check.valid { Answer::Yes } else { Answer::No })
}

fn cmd_report(ctx: &mut Ctx, inputs: &[PathBuf]) -> Result<Answer> {
    if inputs.is_empty() {
        return Err(Error::Invalid("no reports given".into()));
    }
    let mut ok = true;
    let mut text = String::new();
    for p in inputs {
        let body = ctx.read(p)?;
        let r: RunReport = parse(&body, REPORT_V1)?;
        text.push_str(&format!("{}: {} (tol {:e})\n", p.display(), r.command, r.tolerance));
        for h in &r.inputs {
            let status = match InputHash::of_file(Path::new(&h.path)) {
                Ok(now) if now.sha256 == h.sha256 => "unchanged",
                Ok(_) => {
                    ok = false;
                    "CHANGED"
                }
                Err(_) => "missing",
            };
            text.push_str(&format!("  input {} {status}\n", h.path));
        }
        for v in &r.verdicts {
            ok &= v.pass;
            let mark = if v.pass { "pass" } else { "FAIL" };
            text.push_str(&format!("  {mark} {} (tol {:e}): {}\n", v.operation, v.tolerance, v.detail));
        }
    }
    ctx.report.verdict("report", ok, format!("{} reports checked", inputs.len()));
    ctx.emit(&text)?;
    Ok(if ok { Answer::Yes } else { Answer::No })
}
