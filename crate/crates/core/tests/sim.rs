mod common;

use std::fs;
use std::path::Path;
use std::time::Duration;

use assertgen::pipeline::{AdapterConfig, RunConfig};
use assertgen::sim::*;
use assertgen::sva::{parse_sva_file, render, AssertionSuite};
use common::*;
use proptest::prelude::*;

fn rv_timer() -> RunConfig {
    RunConfig::load(&fixture("rv_timer/rv_timer.replay.run.json")).unwrap()
}

fn listing_suite() -> AssertionSuite {
    parse_sva_file(&read_fixture("paper_listings.sva"), "rv_timer")
}

fn inputs(bundle: &DesignBundle) -> Vec<Vec<u8>> {
    bundle
        .design_files
        .iter()
        .chain([&bundle.testbench_file, &bundle.bind_template])
        .map(|p| fs::read(p).unwrap())
        .collect()
}

#[test]
fn composing_leaves_inputs_untouched_and_dirs_disjoint() {
    let bundle = rv_timer().design;
    let before = inputs(&bundle);
    let suite = listing_suite();
    let tmp = tempfile::tempdir().unwrap();
    let handles: Vec<_> = (0..4)
        .map(|i| {
            let (bundle, suite) = (bundle.clone(), suite.clone());
            let dest = tmp.path().join(format!("run{i}"));
            std::thread::spawn(move || compose_workspace(&bundle, &suite, &dest).unwrap())
        })
        .collect();
    let workspaces: Vec<Workspace> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(inputs(&bundle), before);
    let generated: Vec<String> = workspaces
        .iter()
        .map(|w| fs::read_to_string(w.root.join(ASSERTIONS_FILE)).unwrap())
        .collect();
    assert!(generated.windows(2).all(|g| g[0] == g[1]));
    for w in &workspaces {
        assert!(w.root.starts_with(tmp.path()));
        assert!(w.root.join(TB_DIR).is_dir() && w.root.join(RTL_DIR).is_dir());
    }
}

#[test]
fn spans_cover_each_assertion_block() {
    let bundle = rv_timer().design;
    let suite = listing_suite();
    let tmp = tempfile::tempdir().unwrap();
    let ws = compose_workspace(&bundle, &suite, tmp.path()).unwrap();
    let text = fs::read_to_string(ws.root.join(ASSERTIONS_FILE)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(ws.spans.len(), suite.len());
    for (span, a) in ws.spans.iter().zip(&suite.assertions) {
        assert_eq!(span.name, a.name);
        let block = lines[span.first_line as usize - 1..span.last_line as usize].join("\n");
        assert_eq!(block.trim(), a.to_block().trim());
        assert_eq!(ws.assertion_at(span.first_line), Some(a.name.as_str()));
        assert_eq!(ws.assertion_at(span.last_line), Some(a.name.as_str()));
    }
    assert_eq!(ws.assertion_at(1), None);
}

#[test]
fn replayed_logs_are_byte_identical() {
    let config = rv_timer();
    let AdapterConfig::Replay { replay_dir, .. } = &config.adapter else {
        panic!("replay adapter expected");
    };
    let adapter = ReplayAdapter { dir: replay_dir.clone() };
    let tmp = tempfile::tempdir().unwrap();
    for n in [2u32, 8] {
        let log = run_simulation(tmp.path(), "tb", &adapter, n, Duration::from_secs(1)).unwrap();
        let fixture = fs::read(replay_dir.join(format!("iter{n}.log"))).unwrap();
        assert_eq!(log.raw_text.as_bytes(), fixture.as_slice());
        assert_eq!(fs::read(tmp.path().join(LOG_FILE)).unwrap(), fixture);
        let expected_exit = fs::read_to_string(replay_dir.join(format!("iter{n}.exit")))
            .map(|s| s.trim().parse().unwrap())
            .unwrap_or(0);
        assert_eq!(log.exit_code, expected_exit);
    }
    assert!(matches!(
        adapter.run(Path::new("."), "tb", 99, Duration::from_secs(1)),
        Err(SimError::ReplayLogMissing(_))
    ));
}

#[test]
fn bind_template_without_assertions_slot_is_rejected() {
    let mut bundle = rv_timer().design;
    let tmp = tempfile::tempdir().unwrap();
    let template = tmp.path().join("bind.sv.tmpl");
    fs::write(&template, "module m; endmodule\n").unwrap();
    bundle.bind_template = template;
    bundle.check().unwrap();
    let dest = tmp.path().join("ws");
    assert!(matches!(
        compose_workspace(&bundle, &listing_suite(), &dest),
        Err(SimError::BindTemplateMissing(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_generated_line_maps_to_its_assertion(asts in prop::collection::vec(property(), 1..6)) {
        let mut seen = std::collections::HashSet::new();
        let text: Vec<String> = asts
            .iter()
            .filter(|a| seen.insert(a.name.clone()))
            .map(render)
            .collect();
        let suite = parse_sva_file(&text.join("\n\n"), "rv_timer");
        let bundle = rv_timer().design;
        let tmp = tempfile::tempdir().unwrap();
        let ws = compose_workspace(&bundle, &suite, tmp.path()).unwrap();
        let file = fs::read_to_string(ws.root.join(ASSERTIONS_FILE)).unwrap();
        for span in &ws.spans {
            for line in span.first_line..=span.last_line {
                prop_assert_eq!(ws.assertion_at(line), Some(span.name.as_str()));
            }
            let first = file.lines().nth(span.first_line as usize - 1).unwrap();
            prop_assert!(first.contains(&span.name), "{}", first);
        }
    }
}
