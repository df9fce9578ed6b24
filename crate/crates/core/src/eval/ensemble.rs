use super::head::{LinearHead, Prediction};
use super::loss::argmax;
use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Soft voting: per-row average of the members' probability vectors, then
/// argmax (ties to the lowest class). `views[m]` is the input of `heads[m]`.
pub fn ensemble_predict(
    heads: &[LinearHead],
    views: &[&EmbeddingMatrix],
) -> Result<Vec<Prediction>> {
    let Some(first) = heads.first() else {
        return Err(Error::InvalidInput(
            "ensemble needs at least one head".into(),
        ));
    };
    if heads.len() != views.len() {
        return Err(Error::InvalidInput(format!(
            "{} heads but {} embedding views",
            heads.len(),
            views.len()
        )));
    }
    if let Some(h) = heads.iter().find(|h| h.label_set != first.label_set) {
        return Err(Error::InvalidInput(format!(
            "label sets differ: {:?} vs {:?}",
            first.label_set.classes(),
            h.label_set.classes()
        )));
    }
    let ids = views[0].ids();
    for v in &views[1..] {
        if v.ids() != ids {
            let missing = ids.iter().find(|id| v.index_of(id).is_none());
            return Err(match missing {
                Some(id) => Error::MissingId(id.clone()),
                None => Error::InvalidInput("embedding views list ids in different orders".into()),
            });
        }
    }
    for (h, v) in heads.iter().zip(views) {
        if h.dim != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim,
                found: v.dim(),
            });
        }
    }
    let m = heads.len() as f64;
    Ok((0..ids.len())
        .map(|i| {
            let mut avg = vec![0.0; first.n_classes()];
            for (h, v) in heads.iter().zip(views) {
                for (a, p) in avg.iter_mut().zip(h.probabilities(v.row(i))) {
                    *a += p;
                }
            }
            avg.iter_mut().for_each(|a| *a /= m);
            let class_index = argmax(&avg);
            Prediction {
                id: ids[i].clone(),
                class: first.label_set.classes()[class_index].clone(),
                class_index,
                probabilities: avg,
            }
        })
        .collect())
}
