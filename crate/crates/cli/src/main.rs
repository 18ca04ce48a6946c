//! Command line front end: parse scenario files, run the audit battery,
//! export dual graphs, and generate scenarios.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use folires::complex::Complex;
use folires::dualgraph::{audit_circular_chains, build_dual_graph, export_dot, DotAnnotations};
use folires::index::{
    check_corner_reciprocity, check_dicritical_restriction, check_line_sums,
    check_trace_transition, check_triple_relations,
};
use folires::init_workers;
use folires::nodal::{
    detect_scenarios, nodal_components, persistency_audit, ScenarioKind,
};
use folires::report::Report;
use folires::scenarios::{
    darboux_jouanolou, parse_scenario, random_scenario, render_report, render_scenario,
    AuditSelection, GeneratorParams, Mode,
};
use folires::separatrix::{audit_completeness, incomplete_points, partial_separatrices};

#[derive(Parser)]
#[command(name = "folires", version, about = "Audits blow-up sequence scenarios")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AuditArg {
    All,
    Index,
    Separatrix,
    Nodal,
}

impl From<AuditArg> for AuditSelection {
    fn from(a: AuditArg) -> AuditSelection {
        match a {
            AuditArg::All => AuditSelection::All,
            AuditArg::Index => AuditSelection::Index,
            AuditArg::Separatrix => AuditSelection::Separatrix,
            AuditArg::Nodal => AuditSelection::Nodal,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Free,
    AllIncomplete,
    ForceNodalChain,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Free => Mode::Free,
            ModeArg::AllIncomplete => Mode::AllIncomplete,
            ModeArg::ForceNodalChain => Mode::ForceNodalChain,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a scenario file and check sequence validity.
    Validate { file: PathBuf },
    /// Census, separatrix and nodal tables, and audit results.
    Report {
        file: PathBuf,
        /// Add incomplete points and situation hits at this level.
        #[arg(long)]
        level: Option<u32>,
        #[arg(long, value_enum, default_value = "all")]
        audits: AuditArg,
    },
    /// Export the dual graph at a level as DOT text.
    Dot {
        file: PathBuf,
        #[arg(long)]
        level: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run every audit; exit 0 on pass, 1 on audit failure, 2 on
    /// parse or validity errors.
    Check { file: PathBuf },
    /// Write a scenario file.
    #[command(group(ArgGroup::new("source").required(true).args(["dj", "random"])))]
    Gen {
        /// Dicritical family of the given degree.
        #[arg(long, value_name = "m")]
        dj: Option<u32>,
        /// Seeded random scenario.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 0, requires = "random")]
        seed: u64,
        #[arg(long, value_enum, default_value = "free", requires = "random")]
        mode: ModeArg,
        #[arg(long, requires = "random")]
        min_steps: Option<u32>,
        #[arg(long, requires = "random")]
        max_steps: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Situation hits of complete uninterrupted nodal components, per level.
    Scenarios { file: PathBuf },
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("FOLIRES_WORKERS") {
        match v.parse::<usize>() {
            Ok(n) => init_workers(Some(n)),
            Err(_) => eprintln!("warning: ignoring FOLIRES_WORKERS={:?}", v),
        }
    }
    ExitCode::from(run(Cli::parse()))
}

fn run(cli: Cli) -> u8 {
    match cli.cmd {
        Cmd::Validate { file } => validate_cmd(&file),
        Cmd::Report {
            file,
            level,
            audits,
        } => report_cmd(&file, level, audits.into()),
        Cmd::Dot {
            file,
            level,
            output,
        } => dot_cmd(&file, level, output.as_deref()),
        Cmd::Check { file } => check_cmd(&file),
        Cmd::Gen {
            dj,
            random: _,
            seed,
            mode,
            min_steps,
            max_steps,
            output,
        } => gen_cmd(dj, seed, mode.into(), min_steps, max_steps, output.as_deref()),
        Cmd::Scenarios { file } => scenarios_cmd(&file),
    }
}

fn load(path: &Path) -> Result<Complex, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {}", path.display(), e);
        2u8
    })?;
    parse_scenario(&text).map_err(|e| {
        eprintln!("error: {}: {}", path.display(), e);
        2u8
    })
}

fn emit(text: &str, output: Option<&Path>) -> u8 {
    match output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: {}: {}", path.display(), e);
                return 2;
            }
            0
        }
        None => {
            print!("{}", text);
            0
        }
    }
}

fn validate_cmd(file: &Path) -> u8 {
    let cx = match load(file) {
        Ok(cx) => cx,
        Err(code) => return code,
    };
    let rep = cx.validate_sequence();
    println!("{}", rep);
    if rep.passed() {
        0
    } else {
        1
    }
}

fn report_cmd(file: &Path, level: Option<u32>, audits: AuditSelection) -> u8 {
    let cx = match load(file) {
        Ok(cx) => cx,
        Err(code) => return code,
    };
    if let Some(k) = level {
        if k > cx.levels() {
            eprintln!("error: level {} exceeds the sequence length {}", k, cx.levels());
            return 2;
        }
    }
    print!("{}", render_report(&cx, audits));
    if let Some(k) = level {
        println!("level {} detail:", k);
        let pts = incomplete_points(&cx, k);
        if pts.is_empty() {
            println!("  incomplete points: none");
        } else {
            for (p, seps) in pts {
                println!(
                    "  incomplete point {} ({} separatrices)",
                    cx.point(p).name,
                    seps
                );
            }
        }
        match detect_scenarios(&cx, k) {
            Err(e) => println!("  situation hits: {}", e),
            Ok(hits) if hits.is_empty() => println!("  situation hits: none"),
            Ok(hits) => {
                for h in hits {
                    println!(
                        "  situation {} on {} at {}",
                        kind_label(h.kind),
                        cx.curve(h.curve).name,
                        cx.point(h.point).name
                    );
                }
            }
        }
    }
    0
}

fn kind_label(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::IncompleteTrace => "A incomplete-trace",
        ScenarioKind::IncompleteCorner => "B incomplete-corner",
        ScenarioKind::SaturatedComponent => "C saturated-component",
    }
}

fn dot_cmd(file: &Path, level: u32, output: Option<&Path>) -> u8 {
    let cx = match load(file) {
        Ok(cx) => cx,
        Err(code) => return code,
    };
    let g = match build_dual_graph(&cx, level) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {}", e);
            return 2;
        }
    };
    let mut ann = DotAnnotations::default();
    for comp in nodal_components(&cx) {
        ann.nodal_corners.extend(comp.closure.iter().copied());
    }
    for sep in partial_separatrices(&cx) {
        for &m in &sep.members {
            ann.separatrix_vertices
                .extend(cx.curve(m).housing.iter().copied());
        }
    }
    for (p, _) in incomplete_points(&cx, level) {
        ann.incomplete_vertices
            .extend(cx.point(p).comps.iter().copied());
    }
    emit(&export_dot(&cx, &g, &ann), output)
}

fn check_cmd(file: &Path) -> u8 {
    let cx = match load(file) {
        Ok(cx) => cx,
        Err(code) => return code,
    };
    let validity = cx.validate_sequence();
    print_audit("validity", &validity);
    if !validity.passed() {
        return 2;
    }
    let mut ok = true;
    let battery: Vec<(&str, Report)> = vec![
        ("corner reciprocity", check_corner_reciprocity(&cx)),
        ("triple relations", check_triple_relations(&cx)),
        ("line sums", check_line_sums(&cx)),
        ("dicritical restriction", check_dicritical_restriction(&cx)),
        ("trace transition", check_trace_transition(&cx)),
        ("completeness", audit_completeness(&cx)),
        ("nodal transitions", folires::nodal::audit_nodal_transitions(&cx)),
        ("persistency", persistency_audit(&cx)),
    ];
    for (name, rep) in &battery {
        print_audit(name, rep);
        ok &= rep.passed();
    }
    match build_dual_graph(&cx, cx.levels()) {
        Ok(g) => {
            let rep = audit_circular_chains(&g, 50, 0);
            print_audit("circular chains", &rep);
            ok &= rep.passed();
        }
        Err(e) => {
            println!("circular chains: FAIL (no dual graph: {})", e);
            ok = false;
        }
    }
    if ok {
        0
    } else {
        1
    }
}

fn print_audit(name: &str, rep: &Report) {
    if rep.passed() {
        println!("{}: ok ({} checks)", name, rep.checks_run);
    } else {
        println!(
            "{}: FAIL ({} of {} checks failed)",
            name,
            rep.findings.len(),
            rep.checks_run
        );
        for f in &rep.findings {
            println!("  {}", f);
        }
    }
}

fn gen_cmd(
    dj: Option<u32>,
    seed: u64,
    mode: Mode,
    min_steps: Option<u32>,
    max_steps: Option<u32>,
    output: Option<&Path>,
) -> u8 {
    let cx = if let Some(m) = dj {
        match darboux_jouanolou(m) {
            Ok(cx) => cx,
            Err(e) => {
                eprintln!("error: {}", e);
                return 2;
            }
        }
    } else {
        let mut params = GeneratorParams {
            seed,
            mode,
            ..GeneratorParams::default()
        };
        if let Some(n) = min_steps {
            params.min_steps = n;
        }
        if let Some(n) = max_steps {
            params.max_steps = n;
        }
        match random_scenario(params) {
            Ok(cx) => cx,
            Err(e) => {
                eprintln!("error: {}", e);
                return 2;
            }
        }
    };
    emit(&render_scenario(&cx), output)
}

fn scenarios_cmd(file: &Path) -> u8 {
    let cx = match load(file) {
        Ok(cx) => cx,
        Err(code) => return code,
    };
    let designated = nodal_components(&cx)
        .into_iter()
        .filter(|c| c.complete() && c.uninterrupted)
        .count();
    if designated == 0 {
        println!("no complete uninterrupted nodal component");
        return 0;
    }
    for k in 0..=cx.levels() {
        let hits = match detect_scenarios(&cx, k) {
            Ok(hits) => hits,
            Err(e) => {
                eprintln!("error: {}", e);
                return 2;
            }
        };
        if hits.is_empty() {
            println!("level {}: no hits", k);
        } else {
            for h in hits {
                println!(
                    "level {}: {} on {} at {}",
                    k,
                    kind_label(h.kind),
                    cx.curve(h.curve).name,
                    cx.point(h.point).name
                );
            }
        }
    }
    0
}
