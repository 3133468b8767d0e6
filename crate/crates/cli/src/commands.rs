use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use approval_heuristics::{
    best_response as search, builtin, expected_utility, follow_the_leader, leader_plus_best,
    load_scenario, strategy_panel, sweep as run_sweep, sweep_csv, take_x_best, truthful,
    truthful_nontrivial, Ballot, CandidateSet, Classifier, Error, ExactUtility, FutureModel,
    Scenario, TieRule, XRange, BUILTIN_IDS, NONTRIVIAL_EPSILON,
};
use serde::Serialize;
use serde_json::json;

use crate::render::{profile, table, value};
use crate::{BestResponseArgs, ClassifyArgs, EvalArgs, Format, ScenariosArgs, SweepArgs};

/// A built-in id, else a path to a scenario file.
fn resolve(reference: &str) -> Result<Scenario> {
    if BUILTIN_IDS.contains(&reference) {
        return Ok(builtin(reference)?);
    }
    let path = Path::new(reference);
    if !path.exists() {
        return Err(Error::ScenarioNotFound(reference.to_string()).into());
    }
    load_scenario(path).with_context(|| format!("loading scenario {}", path.display()))
}

fn parse_ballot(s: &Scenario, text: &str) -> Result<Ballot> {
    s.candidates()
        .parse_set(text)
        .with_context(|| format!("bad ballot {text:?}"))
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn rule_name(rule: TieRule) -> &'static str {
    match rule {
        TieRule::Lexicographic => "lexicographic",
        TieRule::Random => "random",
    }
}

fn num(v: &ExactUtility) -> serde_json::Value {
    json!(v.to_f64())
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let s = resolve(&args.election.scenario)?;
    let model = FutureModel::new(args.r, args.p)?;
    let ballot = args
        .ballot
        .as_deref()
        .map(|b| parse_ballot(&s, b))
        .transpose()?;
    if args.table {
        return eval_table(args, &s, &model, ballot);
    }

    let c = s.candidates();
    let u = s.utilities();
    let mut reports = Vec::new();
    let mut text = String::new();
    for &k in &args.election.k {
        let lex = s.state(k, TieRule::Lexicographic)?;
        let random = s.state(k, TieRule::Random)?;
        let mut entries = strategy_panel(&s, k, TieRule::Random)?;
        if let Some(b) = ballot {
            entries.push(("ballot".to_string(), b));
        }
        let mut rows = Vec::new();
        let mut json_rows = Vec::new();
        for (label, b) in &entries {
            let lv = expected_utility(&lex, *b, u, &model)?;
            let rv = expected_utility(&random, *b, u, &model)?;
            rows.push(vec![
                label.clone(),
                profile(c, *b),
                lv.to_fixed6(),
                rv.to_fixed6(),
            ]);
            json_rows.push(json!({
                "strategy": label,
                "profile": c.format_set(*b),
                "lexicographic": num(&lv),
                "random": num(&rv),
            }));
        }
        text.push_str(&format!("{} k={} r={} p={}\n", s.id(), k, args.r, args.p));
        text.push_str(&table(
            &["strategy", "profile", "lexicographic", "random"],
            &rows,
        ));
        text.push('\n');
        reports.push(json!({
            "scenario": s.id(),
            "k": k,
            "r": args.r,
            "p": args.p.to_f64(),
            "rows": json_rows,
        }));
    }
    match args.election.format {
        Format::Text => print!("{}", text.trim_end_matches('\n').to_string() + "\n"),
        Format::Json => print_json(&reports)?,
    }
    Ok(())
}

/// Every heuristic ballot as a row, one value column per winner count, then
/// the optimum for each count.
fn eval_table(
    args: &EvalArgs,
    s: &Scenario,
    model: &FutureModel,
    ballot: Option<Ballot>,
) -> Result<()> {
    let c = s.candidates();
    let u = s.utilities();
    let rule = TieRule::from(args.tiebreak);
    let ks = &args.election.k;
    let states = ks
        .iter()
        .map(|&k| s.state(k, rule))
        .collect::<Result<Vec<_>, _>>()?;
    let base = s.state(0, rule)?;

    let t = truthful(u);
    let mut entries: Vec<(String, Ballot)> = vec![("truthful".into(), t)];
    let nontrivial = truthful_nontrivial(u, NONTRIVIAL_EPSILON)?;
    if nontrivial != t {
        entries.push(("truthful-nontrivial".into(), nontrivial));
    }
    for x in 1..t.len() {
        entries.push((
            format!("take-x-best({x})"),
            take_x_best(u, x, s.priority(), XRange::Strict)?,
        ));
    }
    let leaders = follow_the_leader(&base);
    if leaders.len() <= 3 {
        let ids: Vec<usize> = leaders.iter().map(|c| c.index()).collect();
        let mut subsets: Vec<Ballot> = (1u64..1 << ids.len())
            .map(|bits| {
                CandidateSet::from_indices(
                    (0..ids.len())
                        .filter(|i| bits & (1 << i) != 0)
                        .map(|i| ids[i]),
                )
            })
            .collect();
        subsets.sort();
        entries.extend(subsets.into_iter().map(|b| ("follow-the-leader".into(), b)));
    } else {
        entries.push(("follow-the-leader".into(), leaders));
    }
    for b in leader_plus_best(&base, u) {
        entries.push(("leader+best".into(), b));
    }
    if let Some(b) = ballot {
        entries.push(("ballot".into(), b));
    }

    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for (label, b) in &entries {
        let values = states
            .iter()
            .map(|st| expected_utility(st, *b, u, model))
            .collect::<Result<Vec<_>, _>>()?;
        let mut row = vec![label.clone(), profile(c, *b)];
        row.extend(values.iter().map(|v| value(Some(v))));
        rows.push(row);
        json_rows.push(json!({
            "strategy": label,
            "profile": c.format_set(*b),
            "values": ks.iter().zip(&values).map(|(k, v)| json!({"k": k, "value": num(v)})).collect::<Vec<_>>(),
        }));
    }
    for (i, (k, st)) in ks.iter().zip(&states).enumerate() {
        let br = search(st, u, model)?;
        let shown = if br.is_indifferent() {
            "(any)".to_string()
        } else {
            profile(c, br.canonical())
        };
        let mut row = vec![format!("optimal (k={k})"), shown];
        row.extend((0..ks.len()).map(|j| value((i == j).then_some(&br.value))));
        rows.push(row);
        json_rows.push(json!({
            "strategy": "optimal",
            "k": k,
            "indifferent": br.is_indifferent(),
            "profile": c.format_set(br.canonical()),
            "value": num(&br.value),
        }));
    }

    match args.election.format {
        Format::Text => {
            let tallies: Vec<String> = c
                .ids()
                .map(|id| format!("{}={}", c.label(id), base.tallies()[id.index()]))
                .collect();
            let utilities: Vec<String> = c
                .ids()
                .map(|id| format!("{}={}", c.label(id), u.get(id)))
                .collect();
            println!("scenario {}", s.id());
            println!("tallies    {}", tallies.join(" "));
            println!("utilities  {}", utilities.join(" "));
            println!(
                "tie-break {}, r={}, p={}",
                rule_name(rule),
                model.remaining_voters(),
                model.approval_prob()
            );
            println!();
            let mut headers = vec!["strategy".to_string(), "profile".to_string()];
            headers.extend(ks.iter().map(|k| format!("k={k}")));
            let headers: Vec<&str> = headers.iter().map(String::as_str).collect();
            print!("{}", table(&headers, &rows));
        }
        Format::Json => print_json(&json!({
            "scenario": s.id(),
            "tiebreak": rule_name(rule),
            "r": model.remaining_voters(),
            "p": model.approval_prob().to_f64(),
            "rows": json_rows,
        }))?,
    }
    Ok(())
}

pub fn best_response(args: &BestResponseArgs) -> Result<()> {
    let s = resolve(&args.election.scenario)?;
    let model = FutureModel::new(args.r, args.p)?;
    let rule = TieRule::from(args.tiebreak);
    let c = s.candidates();
    let t = truthful(s.utilities());
    let mut reports = Vec::new();
    let mut text = String::new();
    for &k in &args.election.k {
        let br = search(&s.state(k, rule)?, s.utilities(), &model)?;
        text.push_str(&format!(
            "{} k={} tie-break {} r={} p={}\n",
            s.id(),
            k,
            rule_name(rule),
            args.r,
            args.p
        ));
        text.push_str(&format!(
            "best value {} ({} of {} ballots)\n",
            br.value,
            br.ballots.len(),
            br.searched
        ));
        text.push_str(&format!(
            "canonical            {}\n",
            profile(c, br.canonical())
        ));
        text.push_str(&format!(
            "closest to truthful  {}\n",
            profile(c, br.closest_to(t))
        ));
        text.push_str("maximizers\n");
        for b in &br.ballots {
            text.push_str(&format!("  {}\n", profile(c, *b)));
        }
        text.push('\n');
        reports.push(json!({
            "scenario": s.id(),
            "k": k,
            "tiebreak": rule_name(rule),
            "r": args.r,
            "p": args.p.to_f64(),
            "value": num(&br.value),
            "searched": br.searched,
            "indifferent": br.is_indifferent(),
            "canonical": c.format_set(br.canonical()),
            "closest_to_truthful": c.format_set(br.closest_to(t)),
            "ballots": br.ballots.iter().map(|b| c.format_set(*b)).collect::<Vec<_>>(),
        }));
    }
    match args.election.format {
        Format::Text => print!("{}", text.trim_end_matches('\n').to_string() + "\n"),
        Format::Json => print_json(&reports)?,
    }
    Ok(())
}

/// A parsed ballots-file row, numbered from 1.
struct Row {
    number: usize,
    ballot: Ballot,
}

fn unquote(line: &str) -> String {
    let line = line.trim();
    match line.strip_prefix('"').and_then(|l| l.strip_suffix('"')) {
        Some(inner) => inner.replace("\"\"", "\""),
        None => line.to_string(),
    }
}

fn read_rows(s: &Scenario, args: &ClassifyArgs) -> Result<Vec<Row>> {
    let text = match (&args.ballots, &args.ballot) {
        (Some(path), _) => fs::read_to_string(path)
            .map_err(Error::from)
            .with_context(|| format!("reading {}", path.display()))?,
        (None, Some(b)) => b.clone(),
        (None, None) => unreachable!("clap requires one of --ballots/--ballot"),
    };
    // a literal ballot is always exactly one row, even when empty
    let lines: Vec<&str> = if args.ballots.is_some() {
        text.lines().collect()
    } else {
        vec![text.as_str()]
    };
    let mut rows = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        let number = i + 1;
        if args.header && number == 1 && args.ballots.is_some() {
            continue;
        }
        match s.candidates().parse_set(&unquote(line)) {
            Ok(ballot) => rows.push(Row { number, ballot }),
            Err(e) if args.lenient => eprintln!("warning: row {number}: {e}"),
            Err(e) => return Err(anyhow::Error::new(e).context(format!("row {number}"))),
        }
    }
    Ok(rows)
}

pub fn classify(args: &ClassifyArgs) -> Result<()> {
    let s = resolve(&args.election.scenario)?;
    let rows = read_rows(&s, args)?;
    let rule = TieRule::from(args.tiebreak);
    let c = s.candidates();
    let mut reports = Vec::new();
    let mut text = String::new();
    for &k in &args.election.k {
        let classifier = Classifier::new(&s.state(k, rule)?, s.utilities())?;
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut table_rows = Vec::new();
        let mut json_rows = Vec::new();
        for row in &rows {
            let result = classifier.classify(row.ballot)?;
            for label in &result.labels {
                *counts.entry(label.to_string()).or_default() += 1;
            }
            table_rows.push(vec![
                row.number.to_string(),
                profile(c, row.ballot),
                result.to_string(),
            ]);
            json_rows.push(json!({
                "row": row.number,
                "ballot": c.format_set(row.ballot),
                "labels": result.labels.iter().map(ToString::to_string).collect::<Vec<_>>(),
            }));
        }
        let total = rows.len();
        let freq_rows: Vec<Vec<String>> = counts
            .iter()
            .map(|(label, n)| {
                let share = if total == 0 {
                    0.0
                } else {
                    *n as f64 / total as f64
                };
                vec![label.clone(), n.to_string(), format!("{share:.3}")]
            })
            .collect();
        text.push_str(&format!(
            "{} k={} tie-break {}\n",
            s.id(),
            k,
            rule_name(rule)
        ));
        text.push_str(&table(&["row", "ballot", "labels"], &table_rows));
        text.push_str(&format!("\n{total} ballots\n"));
        text.push_str(&table(&["label", "count", "share"], &freq_rows));
        text.push('\n');
        reports.push(json!({
            "scenario": s.id(),
            "k": k,
            "tiebreak": rule_name(rule),
            "rows": json_rows,
            "frequencies": counts,
            "total": total,
        }));
    }
    match args.election.format {
        Format::Text => print!("{}", text.trim_end_matches('\n').to_string() + "\n"),
        Format::Json => print_json(&reports)?,
    }
    Ok(())
}

fn default_sweep_path(s: &Scenario) -> PathBuf {
    let id: String = s
        .id()
        .chars()
        .map(|ch| {
            if ch.is_ascii_alphanumeric() || ch == '-' || ch == '_' {
                ch
            } else {
                '_'
            }
        })
        .collect();
    PathBuf::from(format!("sweep-{id}.csv"))
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let s = resolve(&args.election.scenario)?;
    let rule = TieRule::from(args.tiebreak);
    let mut rows = Vec::new();
    for &k in &args.election.k {
        rows.extend(run_sweep(&s, k, &args.r, args.p, rule)?);
    }
    let out = args.out.clone().unwrap_or_else(|| default_sweep_path(&s));
    fs::write(&out, sweep_csv(&rows))
        .map_err(Error::from)
        .with_context(|| format!("writing {}", out.display()))?;

    let c = s.candidates();
    match args.election.format {
        Format::Text => {
            println!("wrote {} rows to {}", rows.len(), out.display());
            let notes: Vec<Vec<String>> = rows
                .iter()
                .filter(|row| row.strategy == "max")
                .map(|row| {
                    vec![
                        row.seats.to_string(),
                        row.remaining_voters.to_string(),
                        profile(c, row.ballot),
                        row.expected_utility.to_fixed6(),
                    ]
                })
                .collect();
            print!(
                "{}",
                table(&["k", "r", "max ballot", "expected_utility"], &notes)
            );
        }
        Format::Json => print_json(&json!({
            "path": out.display().to_string(),
            "tiebreak": rule_name(rule),
            "rows": rows.iter().map(|row| json!({
                "scenario": row.scenario,
                "k": row.seats,
                "strategy": row.strategy,
                "r": row.remaining_voters,
                "p": row.approval_prob.to_f64(),
                "expected_utility": num(&row.expected_utility),
                "ballot": c.format_set(row.ballot),
            })).collect::<Vec<_>>(),
        }))?,
    }
    Ok(())
}

pub fn scenarios(args: &ScenariosArgs) -> Result<()> {
    if let Some(id) = &args.id {
        let s = resolve(id)?;
        let text = s.to_json();
        match &args.out {
            Some(path) => {
                fs::write(path, &text)
                    .map_err(Error::from)
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("wrote {}", path.display());
            }
            None => print!("{text}"),
        }
        return Ok(());
    }
    let all = BUILTIN_IDS
        .iter()
        .map(|id| builtin(id))
        .collect::<Result<Vec<_>, _>>()?;
    match args.format {
        Format::Text => {
            let rows: Vec<Vec<String>> = all
                .iter()
                .map(|s| {
                    let join = |v: Vec<String>| v.join(",");
                    vec![
                        s.id().to_string(),
                        s.candidates().labels().join(","),
                        join(s.base_tallies().iter().map(u64::to_string).collect()),
                        join(s.utilities().values().iter().map(f64::to_string).collect()),
                    ]
                })
                .collect();
            print!(
                "{}",
                table(&["id", "candidates", "tallies", "utilities"], &rows)
            );
        }
        Format::Json => {
            let values = all
                .iter()
                .map(|s| serde_json::from_str::<serde_json::Value>(&s.to_json()))
                .collect::<Result<Vec<_>, _>>()?;
            print_json(&values)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Tiebreak;

    #[test]
    fn unquotes_rows() {
        assert_eq!(unquote("\"A,B\""), "A,B");
        assert_eq!(unquote("  E \r"), "E");
        assert_eq!(unquote(""), "");
    }

    #[test]
    fn unknown_reference_is_not_found() {
        let err = resolve("nope-not-a-file").unwrap_err();
        assert!(matches!(
            err.downcast_ref::<Error>(),
            Some(Error::ScenarioNotFound(_))
        ));
    }

    #[test]
    fn tiebreak_maps_to_rule() {
        assert_eq!(TieRule::from(Tiebreak::Random), TieRule::Random);
    }
}
