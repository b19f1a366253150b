// Exact-match precision, recall and F1, overall and per type.

use llm_der::eval::{EvalReport, ReportMetadata};
use llm_der::model::{EntityMention, EntityType};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let text = "华能集团在北京生产甲醇。";
    let m = |start, end, etype: &str| {
        EntityMention::from_span("s0", text, start, end, EntityType::new(etype).unwrap()).unwrap()
    };
    let gold = vec![m(0, 4, "ORG"), m(5, 7, "LOC"), m(9, 11, "PRO")];
    // One boundary error and one wrong type.
    let pred = vec![m(0, 4, "ORG"), m(5, 6, "LOC"), m(9, 11, "ORG")];
    let report = EvalReport::evaluate(&gold, &pred, ReportMetadata::default());
    println!("{}", report.to_table());
    assert!((report.overall.metrics.f1 - 1.0 / 3.0).abs() < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
