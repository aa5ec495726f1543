use super::{majority, DecisionTree, LabeledRow, Node};

// Normal deviates for upper-tail confidence levels, interpolated linearly as
// in the original C4.5 release (`Val` / `Dev` tables of `AddErrs`).
const CF_LEVELS: [f64; 9] = [0.0, 0.001, 0.005, 0.01, 0.05, 0.10, 0.20, 0.40, 1.00];
const CF_DEVIATES: [f64; 9] = [4.0, 3.09, 2.58, 2.33, 1.65, 1.28, 0.84, 0.25, 0.00];

fn squared_deviate(cf: f64) -> f64 {
    let i = CF_LEVELS
        .iter()
        .position(|&v| cf <= v)
        .unwrap_or(CF_LEVELS.len() - 1)
        .max(1);
    let z = CF_DEVIATES[i - 1]
        + (CF_DEVIATES[i] - CF_DEVIATES[i - 1]) * (cf - CF_LEVELS[i - 1])
            / (CF_LEVELS[i] - CF_LEVELS[i - 1]);
    z * z
}

/// Extra errors to add to `errors` observed among `n` rows so that the total
/// is the upper confidence bound of the binomial error rate at level `cf`.
///
/// Follows C4.5: the exact binomial bound for zero errors, linear
/// interpolation between 0 and 1 error, and the Wilson-style normal
/// approximation with continuity correction beyond that.
pub fn added_errors(n: f64, errors: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if errors < 1e-6 {
        return n * (1.0 - (cf.ln() / n).exp());
    }
    if errors < 0.9999 {
        let base = n * (1.0 - (cf.ln() / n).exp());
        return base + errors * (added_errors(n, 1.0, cf) - base);
    }
    if errors + 0.5 >= n {
        return 0.67 * (n - errors);
    }
    let coeff = squared_deviate(cf);
    let e = errors + 0.5;
    let pr = (e + coeff / 2.0 + (coeff * (e * (1.0 - e / n) + coeff / 4.0)).sqrt()) / (n + coeff);
    n * pr - errors
}

/// Bottom-up pessimistic pruning: a subtree becomes a majority leaf when the
/// leaf's estimated errors do not exceed the sum of its leaves' estimates.
/// Class counts on every leaf are recomputed from `rows`.
pub fn prune(tree: &DecisionTree, rows: &[LabeledRow], cf: f64) -> DecisionTree {
    let idx: Vec<usize> = (0..rows.len()).collect();
    let n_classes = tree.classes().len();
    let (root, _) = prune_node(tree.root(), rows, idx, cf, n_classes);
    DecisionTree::new(tree.n_features(), tree.classes().to_vec(), root)
        .expect("pruning preserves tree validity")
}

fn leaf_estimate(counts: &[usize], cf: f64) -> f64 {
    let n: usize = counts.iter().sum();
    let errors = n - counts[majority(counts)];
    errors as f64 + added_errors(n as f64, errors as f64, cf)
}

fn prune_node(
    node: &Node,
    rows: &[LabeledRow],
    idx: Vec<usize>,
    cf: f64,
    n_classes: usize,
) -> (Node, f64) {
    let mut counts = vec![0; n_classes];
    for &i in &idx {
        counts[rows[i].label] += 1;
    }
    match node {
        Node::Leaf { class, .. } => {
            // an empty leaf keeps the class it was grown with
            let class = if idx.is_empty() { *class } else { majority(&counts) };
            let est = leaf_estimate(&counts, cf);
            (Node::Leaf { class, counts }, est)
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| rows[i].features[*feature] <= *threshold);
            let (left, el) = prune_node(left, rows, l, cf, n_classes);
            let (right, er) = prune_node(right, rows, r, cf, n_classes);
            let subtree = el + er;
            let as_leaf = leaf_estimate(&counts, cf);
            if !idx.is_empty() && as_leaf <= subtree + 1e-12 {
                (Node::leaf_from_counts(counts), as_leaf)
            } else {
                (
                    Node::Split {
                        feature: *feature,
                        threshold: *threshold,
                        left: Box::new(left),
                        right: Box::new(right),
                    },
                    subtree,
                )
            }
        }
    }
}
