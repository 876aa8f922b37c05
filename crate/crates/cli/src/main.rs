use anyhow::{bail, Context, Result};
use chronolf::decoder::{ConstantScorer, LexicalScorer, TriggerTable};
use chronolf::dpd::search;
use chronolf::eval::{cmd_eval, EvalOptions};
use chronolf::executor::execute_with_network;
use chronolf::lang::{ConstantKind, VocabEntry};
use chronolf::pipeline::{cmd_pipeline, ScorerKind};
use chronolf::timeml::{discover, ingest};
use chronolf::{
    beam_search, BackgroundConstraint, BeamConfig, ConstraintNetwork, DecodeContext, ExecutionContext, GoldDenotation,
    LogicalForm, MatchMode, NodeKind, RelationSet, RunConfig, Scorer, SearchConfig, Vocabulary,
};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "chronolf",
    version,
    about = "Temporal logical forms over Allen's interval algebra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relation-set algebra
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Constraint networks
    #[command(subcommand)]
    Net(NetCmd),
    /// Logical forms
    #[command(subcommand)]
    Lf(LfCmd),
    /// Search for forms that reproduce a gold denotation
    #[command(subcommand)]
    Dpd(DpdCmd),
    /// TimeML corpora
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Beam-decode sentences read as JSON lines
    Decode(DecodeArgs),
    /// Score predictions against a gold corpus
    Eval(EvalArgs),
    /// Decode, execute and score a whole corpus
    Pipeline(PipelineArgs),
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// Compose relation sets left to right; each set is comma separated
    Compose {
        #[arg(required = true, num_args = 2..)]
        sets: Vec<String>,
    },
    /// Converse of a relation set
    Converse { set: String },
}

#[derive(Subcommand)]
enum NetCmd {
    /// Propagate a network and print its relation graph
    ///
    /// Input: {"nodes": [label | {"label", "kind"}], "constraints": [{"source", "target", "relations"}]}
    Solve {
        /// JSON file, or - for stdin
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum LfCmd {
    /// Execute a form and print its denotation and relation graph
    Exec {
        form: String,
        /// Event constants, comma separated
        #[arg(long, value_delimiter = ',')]
        vocab: Vec<String>,
        /// Timex constants, comma separated
        #[arg(long, value_delimiter = ',')]
        timex: Vec<String>,
        /// JSON list of known relations asserted before execution
        #[arg(long)]
        background: Option<PathBuf>,
    },
    /// Print the action sequence of a form, one production per line
    Actions { form: String },
}

#[derive(Subcommand)]
enum DpdCmd {
    /// Print matching forms one per line, then a `# stats` line
    ///
    /// Input: {"vocabulary": [...], "gold": {label: relation}, "background": [...]}
    Search {
        /// JSON file, or - for stdin
        input: PathBuf,
        /// Longest logical form, in actions
        #[arg(long, default_value_t = 12)]
        max_actions: usize,
        #[arg(long, value_enum, default_value_t = Toggle::On)]
        pruning: Toggle,
        /// Also drop `(op X X)`; can lose matches
        #[arg(long)]
        prune_idempotent: bool,
        #[arg(long = "match", value_enum, default_value_t = Match::Strict)]
        match_mode: Match,
        /// Stop listing after this many forms
        #[arg(long)]
        max_results: Option<usize>,
        /// One form per matching class instead of every match
        #[arg(long)]
        witnesses: bool,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Parse a corpus and write `manifest.json` and `graphs/<doc>.json`
    Ingest {
        /// TimeML file, directory or glob
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// File pattern inside a corpus directory
        #[arg(long)]
        pattern: Option<String>,
        /// Label recorded in the manifest
        #[arg(long, default_value = "corpus")]
        tag: String,
    },
}

#[derive(Args)]
struct DecodeArgs {
    /// JSON lines of {"tokens", "vocabulary", "focus"?, "positions"?, "triggers"?}; - for stdin
    input: PathBuf,
    #[arg(long, default_value_t = 10)]
    beam: usize,
    #[arg(long, default_value_t = 12)]
    max_actions: usize,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pruning: Toggle,
    /// Forms reported per sentence
    #[arg(long, default_value_t = 5)]
    top_k: usize,
    #[arg(long, value_enum, default_value_t = ScorerChoice::Lexical)]
    scorer: ScorerChoice,
    /// JSON object mapping lexemes to relations
    #[arg(long)]
    triggers: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// TimeML file, directory or glob
    #[arg(long)]
    corpus: PathBuf,
    /// JSON lines, one record per document
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long = "match", value_enum, default_value_t = Match::Strict)]
    match_mode: Match,
    /// Score against the propagated gold network
    #[arg(long)]
    closure: bool,
    /// Also write `report.json` and `report.txt` here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// TimeML file, directory or glob
    #[arg(long)]
    corpus: PathBuf,
    /// Directory for predictions, reports, graphs and timing
    #[arg(long)]
    out: PathBuf,
    /// Longest logical form, in actions
    #[arg(long, default_value_t = 12)]
    max_actions: usize,
    /// Beam width
    #[arg(long, default_value_t = 10)]
    beam: usize,
    /// Drop equals and redundant relation nestings while decoding
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pruning: Toggle,
    /// strict: predicted set equals gold; lax: contains it
    #[arg(long = "match", value_enum, default_value_t = Match::Strict)]
    match_mode: Match,
    /// Worker threads, 0 for one per core
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// JSON object mapping lexemes to relations
    #[arg(long)]
    triggers: Option<PathBuf>,
    /// Score against the propagated gold network
    #[arg(long)]
    closure: bool,
    /// constant: always the bare anchor constant, a baseline
    #[arg(long, value_enum, default_value_t = ScorerChoice::Lexical)]
    scorer: ScorerChoice,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Match {
    Strict,
    Lax,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScorerChoice {
    Lexical,
    Constant,
}

impl From<Toggle> for bool {
    fn from(t: Toggle) -> bool {
        matches!(t, Toggle::On)
    }
}

impl From<Match> for MatchMode {
    fn from(m: Match) -> MatchMode {
        match m {
            Match::Strict => MatchMode::Strict,
            Match::Lax => MatchMode::Lax,
        }
    }
}

/// A constant given either as a bare label (an event) or with its kind.
#[derive(Deserialize)]
#[serde(untagged)]
enum ConstantSpec {
    Label(String),
    Entry(VocabEntry),
}

fn vocabulary(specs: Vec<ConstantSpec>) -> Result<Vocabulary> {
    let entries = specs.into_iter().map(|s| match s {
        ConstantSpec::Label(label) => (label, ConstantKind::Event),
        ConstantSpec::Entry(e) => (e.label, e.kind),
    });
    Ok(Vocabulary::new(entries)?)
}

#[derive(Deserialize)]
struct NetInput {
    nodes: Vec<ConstantSpec>,
    #[serde(default)]
    constraints: Vec<BackgroundConstraint>,
}

#[derive(Deserialize)]
struct SearchInput {
    vocabulary: Vec<ConstantSpec>,
    gold: GoldDenotation,
    #[serde(default)]
    background: Vec<BackgroundConstraint>,
}

#[derive(Deserialize)]
struct SentenceInput {
    tokens: Vec<String>,
    vocabulary: Vec<ConstantSpec>,
    #[serde(default)]
    focus: Option<usize>,
    #[serde(default)]
    positions: std::collections::BTreeMap<String, usize>,
    #[serde(default)]
    triggers: Option<TriggerTable>,
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_input(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_triggers(path: Option<&Path>) -> Result<TriggerTable> {
    match path {
        Some(p) => read_json(p),
        None => Ok(TriggerTable::default()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data") + "\n"
}

fn parse_set(text: &str) -> Result<RelationSet> {
    Ok(RelationSet::parse_list(text)?)
}

fn algebra(cmd: AlgebraCmd, out: &mut impl Write) -> Result<()> {
    let set = match cmd {
        AlgebraCmd::Compose { sets } => {
            let mut sets = sets.iter().map(|s| parse_set(s));
            let first = sets.next().expect("clap requires two sets")?;
            sets.try_fold(first, |acc, s| s.map(|s| acc.compose(s)))?
        }
        AlgebraCmd::Converse { set } => parse_set(&set)?.converse(),
    };
    writeln!(out, "{set}")?;
    Ok(())
}

fn net(cmd: NetCmd, out: &mut impl Write) -> Result<()> {
    let NetCmd::Solve { input } = cmd;
    let spec: NetInput = read_json(&input)?;
    let mut net = ConstraintNetwork::new();
    for entry in vocabulary(spec.nodes)?.entries() {
        net.add_node(NodeKind::from(entry.kind), entry.label.clone())?;
    }
    for c in &spec.constraints {
        net.assert_by_label(&c.source, &c.target, c.relations)?;
    }
    net.propagate();
    write!(out, "{}", pretty(&net.to_graph()))?;
    Ok(())
}

fn lf(cmd: LfCmd, out: &mut impl Write) -> Result<()> {
    match cmd {
        LfCmd::Exec {
            form,
            vocab,
            timex,
            background,
        } => {
            let lf = LogicalForm::parse(&form)?;
            let entries = vocab
                .into_iter()
                .map(|l| (l, ConstantKind::Event))
                .chain(timex.into_iter().map(|l| (l, ConstantKind::Timex)));
            let background = match background {
                Some(p) => read_json(&p)?,
                None => Vec::new(),
            };
            let ctx = ExecutionContext::new(Vocabulary::new(entries)?, background)?;
            let run = execute_with_network(&lf, &ctx)?;
            let record = json!({
                "form": lf.to_string(),
                "actions": lf.to_actions().to_strings(),
                "denotation": run.denotation,
                "graph": run.graph(),
            });
            write!(out, "{}", pretty(&record))?;
        }
        LfCmd::Actions { form } => {
            for a in LogicalForm::parse(&form)?.to_actions().to_strings() {
                writeln!(out, "{a}")?;
            }
        }
    }
    Ok(())
}

fn dpd(cmd: DpdCmd, out: &mut impl Write) -> Result<()> {
    let DpdCmd::Search {
        input,
        max_actions,
        pruning,
        prune_idempotent,
        match_mode,
        max_results,
        witnesses,
    } = cmd;
    let spec: SearchInput = read_json(&input)?;
    let ctx = ExecutionContext::new(vocabulary(spec.vocabulary)?, spec.background)?;
    let cfg = SearchConfig {
        max_actions,
        pruning: pruning.into(),
        prune_idempotent,
        max_results: if witnesses { Some(0) } else { max_results },
        match_mode: match_mode.into(),
    };
    let result = search(&ctx, &spec.gold, &cfg)?;
    let forms = if witnesses { &result.witnesses } else { &result.matches };
    for lf in forms {
        writeln!(out, "{lf}")?;
    }
    writeln!(out, "# stats {}", serde_json::to_string(&result.stats)?)?;
    Ok(())
}

fn corpus(cmd: CorpusCmd, out: &mut impl Write) -> Result<()> {
    let CorpusCmd::Ingest {
        corpus,
        out: dir,
        pattern,
        tag,
    } = cmd;
    let files = discover(&corpus, pattern.as_deref())?;
    let (manifest, graphs) = ingest(&files, &tag);
    let graph_dir = dir.join("graphs");
    std::fs::create_dir_all(&graph_dir).with_context(|| format!("creating {}", graph_dir.display()))?;
    write_file(&dir.join("manifest.json"), &pretty(&manifest))?;
    for (doc, graph) in &graphs {
        write_file(&graph_dir.join(format!("{}.json", file_safe(doc))), &pretty(graph))?;
    }
    writeln!(
        out,
        "{} documents ({} failed), {} events, {} timexes, {} links, {} warnings, {} inconsistent",
        manifest.documents,
        manifest.failed,
        manifest.events,
        manifest.timexes,
        manifest.links,
        manifest.warnings,
        manifest.inconsistent
    )?;
    Ok(())
}

fn file_safe(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn decode(args: DecodeArgs, out: &mut impl Write) -> Result<()> {
    let default_triggers = read_triggers(args.triggers.as_deref())?;
    let cfg = BeamConfig {
        beam_width: args.beam,
        max_actions: args.max_actions,
        pruning: args.pruning.into(),
    };
    let text = read_input(&args.input)?;
    for (n, line) in text.as_bytes().lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let input: SentenceInput =
            serde_json::from_str(&line).with_context(|| format!("line {}: bad sentence record", n + 1))?;
        let ctx = DecodeContext {
            tokens: input.tokens.iter().map(|t| t.to_lowercase()).collect(),
            vocabulary: vocabulary(input.vocabulary)?,
            focus: input.focus,
            positions: input.positions,
        };
        let scorer: Box<dyn Scorer> = match args.scorer {
            ScorerChoice::Lexical => Box::new(LexicalScorer::with_triggers(
                input.triggers.unwrap_or_else(|| default_triggers.clone()),
            )),
            ScorerChoice::Constant => Box::new(ConstantScorer),
        };
        let exec = ExecutionContext::from_vocabulary(ctx.vocabulary.clone());
        let mut forms = Vec::new();
        for d in beam_search(&ctx, scorer.as_ref(), &cfg)?.into_iter().take(args.top_k) {
            let run = execute_with_network(&d.form, &exec)?;
            forms.push(json!({ "form": d.form.to_string(), "score": d.score, "graph": run.graph() }));
        }
        writeln!(out, "{}", json!({ "line": n + 1, "forms": forms }))?;
    }
    Ok(())
}

fn eval(args: EvalArgs, out: &mut impl Write) -> Result<()> {
    let opts = EvalOptions {
        mode: args.match_mode.into(),
        closure: args.closure,
    };
    let report = cmd_eval(&args.corpus, &args.predictions, &opts)?;
    let table = report.to_table();
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_file(&dir.join("report.json"), &pretty(&report))?;
        write_file(&dir.join("report.txt"), &table)?;
    }
    write!(out, "{table}")?;
    Ok(())
}

fn pipeline(args: PipelineArgs, out: &mut impl Write) -> Result<()> {
    if args.beam == 0 {
        bail!("--beam must be at least 1");
    }
    let cfg = RunConfig {
        max_actions: args.max_actions,
        beam: args.beam,
        pruning: args.pruning.into(),
        match_mode: args.match_mode.into(),
        closure: args.closure,
        scorer: match args.scorer {
            ScorerChoice::Lexical => ScorerKind::Lexical,
            ScorerChoice::Constant => ScorerKind::Constant,
        },
        triggers: read_triggers(args.triggers.as_deref())?,
        jobs: args.jobs,
    };
    let output = cmd_pipeline(&args.corpus, &args.out, &cfg)?;
    write!(out, "{}", output.report.evaluation.to_table())?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    match cli.command {
        Command::Algebra(c) => algebra(c, &mut out)?,
        Command::Net(c) => net(c, &mut out)?,
        Command::Lf(c) => lf(c, &mut out)?,
        Command::Dpd(c) => dpd(c, &mut out)?,
        Command::Corpus(c) => corpus(c, &mut out)?,
        Command::Decode(a) => decode(a, &mut out)?,
        Command::Eval(a) => eval(a, &mut out)?,
        Command::Pipeline(a) => pipeline(a, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Algebra(AlgebraCmd::Compose { .. }) => "algebra compose",
        Command::Algebra(AlgebraCmd::Converse { .. }) => "algebra converse",
        Command::Net(_) => "net solve",
        Command::Lf(LfCmd::Exec { .. }) => "lf exec",
        Command::Lf(LfCmd::Actions { .. }) => "lf actions",
        Command::Dpd(_) => "dpd search",
        Command::Corpus(_) => "corpus ingest",
        Command::Decode(_) => "decode",
        Command::Eval(_) => "eval",
        Command::Pipeline(_) => "pipeline",
    }
}

/// Parse arguments; usage errors also print the flags of the subcommand
/// being invoked.
fn parse_args() -> Result<Cli, ExitCode> {
    let args: Vec<String> = std::env::args().collect();
    Cli::try_parse_from(&args).map_err(|e| {
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            e.exit();
        }
        let _ = e.print();
        let mut cmd = Cli::command();
        cmd.build();
        for word in args.iter().skip(1) {
            match cmd.find_subcommand(word) {
                Some(sub) => cmd = sub.clone(),
                None => break,
            }
        }
        eprintln!("\n{}", cmd.render_help());
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = match parse_args() {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    let name = command_name(&cli.command);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let causes: Vec<String> = e.chain().skip(1).map(ToString::to_string).collect();
            let record = json!({ "command": name, "error": e.to_string(), "causes": causes });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
