// Ranks subject and object slots by random-walk reliability over the
// co-occurrence graph of one relation phrase.

use llm_der::model::{Role, Slot};
use llm_der::screening::{reliability, weighted_reliability, SlotGraph};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let s = |name: &str| Slot::new(name, Role::Subject).unwrap();
    let o = |name: &str| Slot::new(name, Role::Object).unwrap();
    let (a, b, c) = (s("华能集团"), s("神华集团"), s("能"));
    let (x, y) = (o("甲醇"), o("焦炭"));
    let pairs = [(&a, &x), (&b, &x), (&b, &y), (&b, &x), (&c, &y)];

    let graph = SlotGraph::from_pairs(pairs);
    let plain = reliability(&graph, 0.85, 100, 1e-6);
    let weighted = weighted_reliability(&graph, 0.85, 100, 1e-6);
    println!("converged after {} iterations", plain.iterations_used);
    for (i, slot) in graph.nodes().iter().enumerate() {
        println!("{:?} {:<6} plain {:.4} weighted {:.4}", slot.role(), slot.surface(), plain.scores[i], weighted.scores[i]);
    }
    let total: f64 = plain.scores.iter().sum();
    assert!((total - 1.0).abs() < 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
