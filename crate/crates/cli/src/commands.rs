use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use log::{info, warn};

use srl_core::corpus::{
    parse_conll, parse_xml, preprocess, summarize, write_conll_string, ContractionLexicon, Corpus,
    Instance, Rules,
};
use srl_core::eval::{corpus_spans, format_key_values, format_table, score, score_unlabeled, ErrorDecomposition};
use srl_core::experiment::{
    aggregate, baseline_emissions, decode_against, decode_all, read_records, run_experiment,
    select_model, write_records, AggregateOptions, Baseline, DataKind, ExperimentConfig, RoleFilter,
    Scenario,
};
use srl_core::stratify::{stratified_folds_with, LabelPolicy};
use srl_core::tagging::{read_emissions, write_emissions};

use crate::io::{
    check_dir, check_input, check_output, open_input, prepare_out_dir, read_to_string, sibling,
    write_output,
};
use crate::{
    BaselineArgs, Command, Data, DecodeArgs, EvalArgs, Failure, InputFormat, PreprocessArgs,
    ReportArgs, RunArgs, SelectArgs, SplitArgs, SummaryArgs, TableFormat,
};

pub fn dispatch(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Preprocess(a) => preprocess_cmd(a),
        Command::Split(a) => split_cmd(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::Report(a) => report_cmd(a),
        Command::Select(a) => select_cmd(a),
        Command::Baseline(a) => baseline_cmd(a),
        Command::Summary(a) => summary_cmd(a),
    }
}

fn stdin_once(paths: &[&Path]) -> Result<(), Failure> {
    if paths.iter().filter(|p| crate::io::is_std(p)).count() > 1 {
        return Err(Failure::usage("standard input can be given as `-` only once"));
    }
    Ok(())
}

fn load_conll(path: &Path) -> Result<Corpus> {
    parse_conll(open_input(path)?).with_context(|| format!("{}", path.display()))
}

fn load_corpus(path: &Path, format: InputFormat) -> Result<Corpus> {
    match format {
        InputFormat::Conll => load_conll(path),
        InputFormat::Xml => {
            let (corpus, report) =
                parse_xml(open_input(path)?).with_context(|| format!("{}", path.display()))?;
            for w in &report.warnings {
                warn!("{}: {w}", path.display());
            }
            for (id, reason) in &report.rejected {
                warn!("{}: instance {id} rejected: {reason}", path.display());
            }
            Ok(corpus)
        }
    }
}

fn preprocess_cmd(a: &PreprocessArgs) -> Result<(), Failure> {
    let mut rules = Rules::from_list(&a.rules).map_err(|e| Failure::usage(e.to_string()))?;
    let mut inputs = vec![a.input.as_path()];
    if let Some(c) = &a.contractions {
        inputs.push(c);
    }
    stdin_once(&inputs)?;
    for p in &inputs {
        check_input(p)?;
    }
    check_output(&a.out)?;
    check_output(&a.report)?;

    if let Some(path) = &a.contractions {
        let text = read_to_string(path)?;
        rules.lexicon = ContractionLexicon::parse(&text).with_context(|| format!("{}", path.display()))?;
    }
    let corpus = load_corpus(&a.input, a.format)?;
    let (clean, report) = preprocess(&corpus, &rules);
    info!("{} of {} instances kept", report.instances_out, report.instances_in);
    let text = write_conll_string(&clean).context("writing cleaned corpus")?;
    write_output(&a.out, text.as_bytes())?;
    write_output(&a.report, report.to_key_values().as_bytes())?;
    Ok(())
}

fn split_cmd(a: &SplitArgs) -> Result<(), Failure> {
    if a.k < 2 {
        return Err(Failure::usage("--k must be at least 2"));
    }
    check_input(&a.input)?;
    prepare_out_dir(&a.out_dir)?;

    let corpus = load_conll(&a.input)?;
    let policy = LabelPolicy {
        include_continuation_and_reference: !a.base_roles_only,
    };
    let folds = stratified_folds_with(&corpus, a.k, a.seed, policy).map_err(anyhow::Error::from)?;
    let width = (a.k - 1).to_string().len().max(2);
    for (j, fold) in folds.fold_corpora(&corpus).iter().enumerate() {
        let path = a.out_dir.join(format!("fold_{j:0width$}.conll"));
        let text = write_conll_string(fold).with_context(|| format!("writing {}", path.display()))?;
        write_output(&path, text.as_bytes())?;
    }
    write_output(&a.out_dir.join("manifest.tsv"), folds.to_manifest().as_bytes())?;
    info!("fold sizes {:?}", folds.sizes());
    Ok(())
}

/// Instance ids of the form `<sentence>:<predicate index>`.
fn split_id(id: &str) -> Result<(&str, usize)> {
    id.rsplit_once(':')
        .and_then(|(s, p)| p.parse().ok().map(|p| (s, p)))
        .ok_or_else(|| anyhow!("instance id {id:?} is not <sentence>:<predicate>; pass --corpus"))
}

fn decode_cmd(a: &DecodeArgs) -> Result<(), Failure> {
    let mut inputs = vec![a.emissions.as_path()];
    if let Some(c) = &a.corpus {
        inputs.push(c);
    }
    stdin_once(&inputs)?;
    for p in &inputs {
        check_input(p)?;
    }
    check_output(&a.out)?;

    let emissions = read_emissions(open_input(&a.emissions)?)
        .with_context(|| format!("{}", a.emissions.display()))?;
    let predicted = match &a.corpus {
        Some(path) => {
            let gold = load_conll(path)?;
            let spans = decode_against(&emissions, &gold).map_err(anyhow::Error::from)?;
            gold.instances
                .iter()
                .zip(spans)
                .map(|(inst, (_, spans))| Instance {
                    gold: Some(spans),
                    flags: Default::default(),
                    ..inst.clone()
                })
                .collect()
        }
        None => {
            let spans = decode_all(&emissions).map_err(anyhow::Error::from)?;
            let mut out = Vec::with_capacity(spans.len());
            for (m, (id, spans)) in emissions.instances.iter().zip(spans) {
                let (sentence, pred) = split_id(&id)?;
                if pred >= m.tokens() {
                    return Err(Failure::data(format!(
                        "instance {id}: predicate index beyond {} tokens",
                        m.tokens()
                    )));
                }
                let mut inst = Instance::new(sentence, vec!["_".to_owned(); m.tokens()], pred, Some(spans));
                inst.predicate_lemma = "_".into();
                out.push(inst);
            }
            out
        }
    };
    let text = write_conll_string(&Corpus::new(predicted)).context("writing predictions")?;
    write_output(&a.out, text.as_bytes())?;
    Ok(())
}

fn eval_cmd(a: &EvalArgs) -> Result<(), Failure> {
    stdin_once(&[&a.gold, &a.pred])?;
    check_input(&a.gold)?;
    check_input(&a.pred)?;
    check_output(&a.out)?;

    let gold = corpus_spans(&load_conll(&a.gold)?);
    let pred = corpus_spans(&load_conll(&a.pred)?);
    let labeled = score(&gold, &pred).map_err(anyhow::Error::from)?;
    let unlabeled = score_unlabeled(&gold, &pred).map_err(anyhow::Error::from)?;
    let decomposition = a
        .decompose
        .then(|| ErrorDecomposition::from_reports(&labeled, &unlabeled));
    let report = if a.unlabeled { &unlabeled } else { &labeled };
    let table = format_table(report, decomposition.as_ref());
    let kv = format_key_values(report, decomposition.as_ref());
    if crate::io::is_std(&a.out) {
        write_output(&a.out, format!("{table}\n{kv}").as_bytes())?;
    } else {
        write_output(&a.out, table.as_bytes())?;
        write_output(&sibling(&a.out, ".kv"), kv.as_bytes())?;
    }
    Ok(())
}

fn run_cmd(a: &RunArgs) -> Result<(), Failure> {
    check_input(&a.config)?;
    if crate::io::is_std(&a.config) {
        return Err(Failure::usage("--config must be a file"));
    }
    let config = ExperimentConfig::load(&a.config).map_err(anyhow::Error::from)?;
    for p in config.folds.iter().chain(&config.out_of_domain) {
        check_input(p)?;
    }
    prepare_out_dir(&a.out_dir)?;

    let run = run_experiment(&config).map_err(anyhow::Error::from)?;
    write_records(&a.out_dir, &run).map_err(anyhow::Error::from)?;
    let options = AggregateOptions {
        baseline: config.baseline.clone(),
        pooled: config.pooled,
    };
    let table = aggregate(&run.records, &options);
    write_output(&a.out_dir.join("results.txt"), table.to_table().as_bytes())?;
    write_output(&a.out_dir.join("results.tsv"), table.to_tsv().as_bytes())?;
    if !run.gaps.is_empty() {
        warn!("{} of {} runs missing", run.gaps.len(), run.gaps.len() + run.records.len());
    }
    Ok(())
}

fn report_cmd(a: &ReportArgs) -> Result<(), Failure> {
    let baseline = match &a.baseline_scenario {
        Some(s) => Some(Baseline {
            model: a.baseline_model.clone(),
            scenario: s.parse::<Scenario>().map_err(|e| Failure::usage(e.to_string()))?,
        }),
        None => None,
    };
    check_dir(&a.runs)?;
    check_output(&a.out)?;

    let run = read_records(&a.runs).map_err(anyhow::Error::from)?;
    if run.records.is_empty() {
        return Err(Failure::data(format!("{}: no run records", a.runs.display())));
    }
    for g in &run.gaps {
        warn!("missing run {} {} {}: {}", g.model, g.scenario, g.split, g.reason);
    }
    let table = aggregate(
        &run.records,
        &AggregateOptions {
            baseline,
            pooled: a.pooled,
        },
    );
    let text = match a.format {
        TableFormat::Table => table.to_table(),
        TableFormat::Tsv => table.to_tsv(),
    };
    write_output(&a.out, text.as_bytes())?;
    Ok(())
}

fn select_cmd(a: &SelectArgs) -> Result<(), Failure> {
    check_dir(&a.runs)?;
    check_output(&a.out)?;
    let roles = a.roles.as_deref().map_or(RoleFilter::All, RoleFilter::parse_list);
    let kind = match a.data {
        Data::Clean => DataKind::Clean,
        Data::Unclean => DataKind::Unclean,
    };
    let run = read_records(&a.runs).map_err(anyhow::Error::from)?;
    let choice = select_model(&run.records, kind, &roles).map_err(anyhow::Error::from)?;
    let mut text = format!("{}\t{}\t{:.2}\n", choice.model, choice.scenario, 100.0 * choice.score);
    for (model, scenario, score) in choice.ranking.iter().skip(1) {
        writeln!(text, "# {model}\t{scenario}\t{:.2}", 100.0 * score).unwrap();
    }
    write_output(&a.out, text.as_bytes())?;
    Ok(())
}

fn baseline_cmd(a: &BaselineArgs) -> Result<(), Failure> {
    stdin_once(&[&a.train, &a.test])?;
    check_input(&a.train)?;
    check_input(&a.test)?;
    check_output(&a.out)?;
    let train = load_conll(&a.train)?;
    let test = load_conll(&a.test)?;
    let emissions = baseline_emissions(&train, &test).map_err(anyhow::Error::from)?;
    let mut buf = Vec::new();
    write_emissions(&mut buf, &emissions).context("serializing emissions")?;
    write_output(&a.out, &buf)?;
    Ok(())
}

fn summary_cmd(a: &SummaryArgs) -> Result<(), Failure> {
    check_input(&a.input)?;
    check_output(&a.out)?;
    let s = summarize(&load_corpus(&a.input, a.format)?);
    let text = format!(
        "instances={}\narguments={}\nroles={}\n",
        s.instance_count, s.annotated_arg_count, s.role_count
    );
    write_output(&a.out, text.as_bytes())?;
    Ok(())
}
