//! C4.5-style decision trees over real-valued features: binary splits chosen
//! by gain ratio, a minimum leaf size, pessimistic-error pruning, prediction,
//! JSON persistence and stratified cross-validation.

mod cv;
mod induce;
mod prune;

pub use cv::{cross_validate, stratified_folds, CvReport};
pub use induce::{entropy, induce, split_gain_ratio, SplitScore};
pub use prune::{added_errors, prune};

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("empty training set")]
    EmptyDataset,
    #[error("row {row} has {actual} features, expected {expected}")]
    InconsistentWidth {
        row: usize,
        expected: usize,
        actual: usize,
    },
    #[error("row {row} has a non-finite feature value")]
    NonFinite { row: usize },
    #[error("feature vector has {actual} values but the tree expects {expected}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("invalid induction config: {0}")]
    InvalidConfig(String),
    #[error("tree document error at `{path}`: {msg}")]
    Parse { path: String, msg: String },
    #[error("cross-validation: {0}")]
    CrossValidation(String),
}

/// Training row: feature values and a zero-based class index.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledRow {
    pub features: Vec<f64>,
    pub label: usize,
}

impl LabeledRow {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        Self { features, label }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InductionConfig {
    /// Pruning confidence factor in (0, 1]; smaller prunes harder and 1.0
    /// disables pruning.
    pub confidence: f64,
    /// Minimum number of training rows in each leaf.
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Seed for anything randomized around induction (fold assignment).
    pub seed: u64,
}

impl Default for InductionConfig {
    fn default() -> Self {
        Self {
            confidence: 0.25,
            min_leaf: 2,
            max_depth: None,
            seed: 0,
        }
    }
}

impl InductionConfig {
    /// Heavier pruning with large leaves, as used for the veil pixel tree.
    pub fn paper() -> Self {
        Self {
            confidence: 0.1,
            min_leaf: 100,
            ..Self::default()
        }
    }

    pub fn unpruned(min_leaf: usize) -> Self {
        Self {
            confidence: 1.0,
            min_leaf,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        if !(self.confidence > 0.0 && self.confidence <= 1.0) {
            return Err(TreeError::InvalidConfig(format!(
                "confidence factor {} must be in (0, 1]",
                self.confidence
            )));
        }
        if self.min_leaf == 0 {
            return Err(TreeError::InvalidConfig("min_leaf must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Leaf {
        class: usize,
        /// Training rows per class that reached this leaf.
        counts: Vec<usize>,
    },
    /// `value <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn leaf_from_counts(counts: Vec<usize>) -> Node {
        Node::Leaf {
            class: majority(&counts),
            counts,
        }
    }

    fn count_nodes(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => 1 + left.count_nodes() + right.count_nodes(),
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Node)) {
        f(self);
        if let Node::Split { left, right, .. } = self {
            left.visit(f);
            right.visit(f);
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Most frequent class, lowest index on ties.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    n_features: usize,
    classes: Vec<String>,
    root: Node,
}

impl DecisionTree {
    pub fn new(n_features: usize, classes: Vec<String>, root: Node) -> Result<Self, TreeError> {
        let tree = Self {
            n_features,
            classes,
            root,
        };
        tree.check()?;
        Ok(tree)
    }

    fn check(&self) -> Result<(), TreeError> {
        let mut err = None;
        self.root.visit(&mut |n| {
            if err.is_some() {
                return;
            }
            match n {
                Node::Split {
                    feature, threshold, ..
                } => {
                    if *feature >= self.n_features || !threshold.is_finite() {
                        err = Some(format!("bad split on feature index {feature}"));
                    }
                }
                Node::Leaf { class, counts } => {
                    if *class >= self.classes.len() || counts.len() != self.classes.len() {
                        err = Some(format!("leaf class {class} inconsistent with class list"));
                    }
                }
            }
        });
        match err {
            Some(msg) => Err(TreeError::Parse {
                path: "root".into(),
                msg,
            }),
            None => Ok(()),
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self, TreeError> {
        if names.len() != self.classes.len() {
            return Err(TreeError::InvalidConfig(format!(
                "{} class names given for {} classes",
                names.len(),
                self.classes.len()
            )));
        }
        self.classes = names;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.root.count_nodes()
    }

    pub fn leaf_count(&self) -> usize {
        let mut n = 0;
        self.root.visit(&mut |node| {
            if matches!(node, Node::Leaf { .. }) {
                n += 1;
            }
        });
        n
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaves(&self) -> Vec<&Node> {
        let mut out = Vec::new();
        self.root.visit(&mut |node| {
            if matches!(node, Node::Leaf { .. }) {
                out.push(node);
            }
        });
        out
    }

    /// Zero-based indices of the features tested anywhere in the tree.
    pub fn used_features(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.root.visit(&mut |node| {
            if let Node::Split { feature, .. } = node {
                out.insert(*feature);
            }
        });
        out
    }

    pub fn predict(&self, features: &[f64]) -> Result<usize, TreeError> {
        if features.len() != self.n_features {
            return Err(TreeError::WidthMismatch {
                expected: self.n_features,
                actual: features.len(),
            });
        }
        Ok(self.predict_unchecked(features))
    }

    /// Descends without checking the width; only the tested features are read.
    #[inline]
    pub fn predict_unchecked(&self, features: &[f64]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { class, .. } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if features[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        fn node_json(n: &Node) -> Value {
            match n {
                Node::Leaf { class, counts } => json!({"leaf": {"class": class, "counts": counts}}),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => json!({
                    "feature": feature + 1,
                    "threshold": threshold,
                    "left": node_json(left),
                    "right": node_json(right),
                }),
            }
        }
        let doc = json!({
            "n_features": self.n_features,
            "classes": self.classes,
            "root": node_json(&self.root),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("tree serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| TreeError::Parse {
            path: "$".into(),
            msg: e.to_string(),
        })?;
        let obj = as_object(&doc, "$")?;
        let n_features = as_usize(field(obj, "$", "n_features")?, "$.n_features")?;
        let classes = match field(obj, "$", "classes")? {
            Value::Array(items) if !items.is_empty() => items
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_str().map(str::to_string).ok_or_else(|| parse_err(format!("$.classes[{i}]"), "expected a string"))
                })
                .collect::<Result<Vec<_>, _>>()?,
            _ => return Err(parse_err("$.classes", "expected a non-empty array of class names")),
        };
        let root = parse_node(field(obj, "$", "root")?, "$.root", n_features, classes.len())?;
        Ok(Self {
            n_features,
            classes,
            root,
        })
    }
}

fn parse_err(path: impl Into<String>, msg: impl Into<String>) -> TreeError {
    TreeError::Parse {
        path: path.into(),
        msg: msg.into(),
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, TreeError> {
    v.as_object().ok_or_else(|| parse_err(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, TreeError> {
    obj.get(key)
        .ok_or_else(|| parse_err(path, format!("missing field `{key}`")))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, TreeError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| parse_err(path, "expected a non-negative integer"))
}

fn parse_node(v: &Value, path: &str, n_features: usize, n_classes: usize) -> Result<Node, TreeError> {
    let obj = as_object(v, path)?;
    if let Some(leaf) = obj.get("leaf") {
        let lp = format!("{path}.leaf");
        let leaf = as_object(leaf, &lp)?;
        let class = as_usize(field(leaf, &lp, "class")?, &format!("{lp}.class"))?;
        if class >= n_classes {
            return Err(parse_err(format!("{lp}.class"), format!("class {class} out of range")));
        }
        let counts = match leaf.get("counts") {
            None => vec![0; n_classes],
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, c)| as_usize(c, &format!("{lp}.counts[{i}]")))
                .collect::<Result<Vec<_>, _>>()?,
            Some(_) => return Err(parse_err(format!("{lp}.counts"), "expected an array")),
        };
        if counts.len() != n_classes {
            return Err(parse_err(
                format!("{lp}.counts"),
                format!("expected {n_classes} counts, got {}", counts.len()),
            ));
        }
        return Ok(Node::Leaf { class, counts });
    }
    let fpath = format!("{path}.feature");
    let feature = as_usize(field(obj, path, "feature")?, &fpath)?;
    if feature == 0 || feature > n_features {
        return Err(parse_err(
            fpath,
            format!("feature {feature} outside 1..={n_features}"),
        ));
    }
    let threshold = field(obj, path, "threshold")?
        .as_f64()
        .filter(|t| t.is_finite())
        .ok_or_else(|| parse_err(format!("{path}.threshold"), "expected a finite number"))?;
    let left = parse_node(field(obj, path, "left")?, &format!("{path}.left"), n_features, n_classes)?;
    let right = parse_node(field(obj, path, "right")?, &format!("{path}.right"), n_features, n_classes)?;
    Ok(Node::Split {
        feature: feature - 1,
        threshold,
        left: Box::new(left),
        right: Box::new(right),
    })
}
