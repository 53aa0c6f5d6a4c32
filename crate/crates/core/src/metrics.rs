//! Reference implementations of the evaluation metrics.
//!
//! All metrics share one text normalization: lowercase, punctuation stripped
//! to spaces, whitespace collapsed. F_add uses bigram *set* semantics (the
//! simplest reading of its definition); note that the original
//! simplification-metric formulation it descends from is count-based.

use std::collections::BTreeSet;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("length mismatch: {left} predictions vs {right} golds")]
    LengthMismatch { left: usize, right: usize },
    #[error("no records to evaluate")]
    EmptyInput,
}

/// Shared normalization: lowercase, punctuation to spaces, collapsed
/// whitespace.
pub fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for ch in lowered.chars() {
        if ch.is_alphanumeric() {
            out.push(ch);
        } else {
            out.push(' ');
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn tokens(text: &str) -> Vec<String> {
    normalize(text)
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn bigram_counts(text: &str) -> HashMap<(String, String), u64> {
    let toks = tokens(text);
    let mut counts = HashMap::new();
    for w in toks.windows(2) {
        *counts.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
    }
    counts
}

fn bigram_set(text: &str) -> BTreeSet<(String, String)> {
    let toks = tokens(text);
    toks.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio(num: u64, denom: u64) -> f64 {
    if denom == 0 {
        0.0
    } else {
        num as f64 / denom as f64
    }
}

/// Binary matching quality from a confusion matrix. With no positive
/// predictions, precision is taken as 0 (and F1 follows).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchEval {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn eval_matching(preds: &[bool], golds: &[bool]) -> Result<MatchEval, MetricsError> {
    if preds.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            left: preds.len(),
            right: golds.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut tn = 0u64;
    let mut fne = 0u64;
    for (&p, &g) in preds.iter().zip(golds) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fne += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fne);
    Ok(MatchEval {
        accuracy: (tp + tn) as f64 / preds.len() as f64,
        precision,
        recall,
        f1: f1(precision, recall),
    })
}

/// Fraction of gold modifications whose normalized text appears as a
/// substring of the (normalized) predicted explanation. Micro-averaged over
/// all records; 0 when there are no modifications at all.
pub fn explanation_hit_rate(
    pred_explanations: &[String],
    gold_modifications: &[Vec<String>],
) -> Result<f64, MetricsError> {
    if pred_explanations.len() != gold_modifications.len() {
        return Err(MetricsError::LengthMismatch {
            left: pred_explanations.len(),
            right: gold_modifications.len(),
        });
    }
    let mut hits = 0u64;
    let mut total = 0u64;
    for (explanation, mods) in pred_explanations.iter().zip(gold_modifications) {
        let haystack = normalize(explanation);
        for modification in mods {
            total += 1;
            let needle = normalize(modification);
            if !needle.is_empty() && haystack.contains(&needle) {
                hits += 1;
            }
        }
    }
    Ok(ratio(hits, total))
}

/// Set-extraction quality: exact-set accuracy plus micro item F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionEval {
    /// Fraction of documents whose predicted set equals gold exactly, after
    /// normalization.
    pub accuracy: f64,
    /// Micro-averaged F1 over the multiset of items.
    pub f1: f64,
}

fn normalized_multiset(items: &[String]) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for item in items {
        let n = normalize(item);
        if !n.is_empty() {
            *counts.entry(n).or_insert(0) += 1;
        }
    }
    counts
}

pub fn eval_extraction(
    preds: &[Vec<String>],
    golds: &[Vec<String>],
) -> Result<ExtractionEval, MetricsError> {
    if preds.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            left: preds.len(),
            right: golds.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut exact = 0u64;
    let mut tp = 0u64;
    let mut pred_total = 0u64;
    let mut gold_total = 0u64;
    for (pred, gold) in preds.iter().zip(golds) {
        let pred_counts = normalized_multiset(pred);
        let gold_counts = normalized_multiset(gold);

        let pred_set: BTreeSet<&String> = pred_counts.keys().collect();
        let gold_set: BTreeSet<&String> = gold_counts.keys().collect();
        if pred_set == gold_set {
            exact += 1;
        }

        pred_total += pred_counts.values().sum::<u64>();
        gold_total += gold_counts.values().sum::<u64>();
        for (item, &count) in &pred_counts {
            tp += count.min(gold_counts.get(item).copied().unwrap_or(0));
        }
    }
    let precision = ratio(tp, pred_total);
    let recall = ratio(tp, gold_total);
    Ok(ExtractionEval {
        accuracy: exact as f64 / preds.len() as f64,
        f1: f1(precision, recall),
    })
}

/// Bigram-overlap F1 with clipped counts; 0 when either side has no bigram.
pub fn rouge2(candidate: &str, reference: &str) -> f64 {
    let cand = bigram_counts(candidate);
    let refr = bigram_counts(reference);
    let cand_total: u64 = cand.values().sum();
    let ref_total: u64 = refr.values().sum();
    if cand_total == 0 || ref_total == 0 {
        return 0.0;
    }
    let overlap: u64 = cand
        .iter()
        .map(|(bg, &c)| c.min(refr.get(bg).copied().unwrap_or(0)))
        .sum();
    f1(ratio(overlap, cand_total), ratio(overlap, ref_total))
}

/// F1 over bigrams present in the output and the reference but absent from
/// the input: rewards exactly the content the edit was supposed to add.
/// Set semantics; any zero denominator zeroes that component.
pub fn f_add(output: &str, reference: &str, input: &str) -> f64 {
    let out_set = bigram_set(output);
    let ref_set = bigram_set(reference);
    let in_set = bigram_set(input);

    let out_new: BTreeSet<_> = out_set.difference(&in_set).cloned().collect();
    let ref_new: BTreeSet<_> = ref_set.difference(&in_set).cloned().collect();
    let tp = out_new.intersection(&ref_new).count() as u64;

    let precision = ratio(tp, out_new.len() as u64);
    let recall = ratio(tp, ref_new.len() as u64);
    f1(precision, recall)
}

/// Mean editing quality over aligned records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditEval {
    pub rouge2_f1: f64,
    pub f_add: f64,
}

pub fn eval_editing(
    outputs: &[String],
    references: &[String],
    inputs: &[String],
) -> Result<EditEval, MetricsError> {
    if outputs.len() != references.len() || outputs.len() != inputs.len() {
        return Err(MetricsError::LengthMismatch {
            left: outputs.len(),
            right: references.len().max(inputs.len()),
        });
    }
    if outputs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = outputs.len() as f64;
    let rouge_sum: f64 = outputs
        .iter()
        .zip(references)
        .map(|(o, r)| rouge2(o, r))
        .sum();
    let fadd_sum: f64 = outputs
        .iter()
        .zip(references.iter().zip(inputs))
        .map(|(o, (r, i))| f_add(o, r, i))
        .sum();
    Ok(EditEval {
        rouge2_f1: rouge_sum / n,
        f_add: fadd_sum / n,
    })
}
