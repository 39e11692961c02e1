//! The evaluation metrics on small, checkable inputs.
//!
//! cargo run --example metrics_walkthrough

use patchtriage::metrics::{auc, average_precision, f1, map_mrr, pos_neg_recall, reciprocal_rank, Class, LabeledScore};

fn item(id: &str, score: f64, label: Class) -> LabeledScore {
    LabeledScore {
        patch_id: id.into(),
        score,
        label,
        verdict: if score > 0.5 { Class::Correct } else { Class::Incorrect },
    }
}

fn main() {
    let items = [
        item("p1", 0.9, Class::Correct),
        item("p2", 0.4, Class::Correct),
        item("n1", 0.6, Class::Incorrect),
        item("n2", 0.2, Class::Incorrect),
    ];
    println!("AUC       {:.4}", auc(&items).unwrap());
    let (pos, neg) = pos_neg_recall(&items).unwrap();
    println!("+Recall   {pos:.4}");
    println!("-Recall   {neg:.4}");
    let f = f1(&items).unwrap();
    println!("F1        {:.4} (degenerate: {})", f.value, f.degenerate);

    println!("\nAP([1,0,1])  {:.4}", average_precision(&[true, false, true]).unwrap());
    println!("RR([0,1,0])  {:.4}", reciprocal_rank(&[false, true, false]).unwrap());
    let (map, mrr) = map_mrr(&[vec![true, false, true], vec![false, true], vec![false, false]]).unwrap();
    println!("MAP {map:.4}  MRR {mrr:.4}  (the all-incorrect list is skipped)");
}
