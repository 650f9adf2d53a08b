//! Confusion matrices and intersection over union between label maps.

use serde::{Deserialize, Serialize};

use crate::annotations::LabelMap;
use crate::taxonomy::{default_palette, PaletteEntry, VOID_CODE};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("size mismatch: ground truth is {0}x{1}, prediction is {2}x{3}")]
    SizeMismatch(u32, u32, u32, u32),
    #[error("{map} contains code {code} at pixel ({x}, {y}), which is not in the class set")]
    UnknownCode { map: &'static str, code: u8, x: u32, y: u32 },
    #[error("class set: {0}")]
    ClassSet(String),
}

/// Ordered list of evaluated classes. Void is never a member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSet {
    entries: Vec<(u8, String)>,
    slot: [Option<u16>; 256],
}

impl ClassSet {
    pub fn new(entries: Vec<(u8, String)>) -> Result<ClassSet, EvalError> {
        let mut slot = [None; 256];
        for (i, (code, name)) in entries.iter().enumerate() {
            if *code == VOID_CODE {
                return Err(EvalError::ClassSet("void cannot be an evaluated class".into()));
            }
            if slot[*code as usize].replace(i as u16).is_some() {
                return Err(EvalError::ClassSet(format!("code {code} ({name}) listed twice")));
            }
        }
        if entries.is_empty() {
            return Err(EvalError::ClassSet("no classes".into()));
        }
        Ok(ClassSet { entries, slot })
    }

    /// Non-void rows of a palette, in order.
    pub fn from_palette(palette: &[PaletteEntry]) -> Result<ClassSet, EvalError> {
        ClassSet::new(
            palette
                .iter()
                .filter(|e| e.code != VOID_CODE)
                .map(|e| (e.code, e.name.clone()))
                .collect(),
        )
    }

    /// Reads a palette file: a JSON array of `{code, name, color}` rows or
    /// any JSON object with such an array under `palette` (a dataset header).
    pub fn from_json(text: &str) -> Result<ClassSet, EvalError> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum File {
            Rows(Vec<PaletteEntry>),
            Header { palette: Vec<PaletteEntry> },
        }
        let rows = match serde_json::from_str::<File>(text).map_err(|e| EvalError::ClassSet(e.to_string()))? {
            File::Rows(r) | File::Header { palette: r } => r,
        };
        ClassSet::from_palette(&rows)
    }

    /// The 16 generator classes.
    pub fn standard() -> ClassSet {
        ClassSet::from_palette(&default_palette()).expect("default palette is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u8, String)] {
        &self.entries
    }

    pub fn index_of(&self, code: u8) -> Option<usize> {
        self.slot[code as usize].map(|i| i as usize)
    }
}

/// `counts[g * k + p]` = pixels of ground truth class `g` predicted as `p`.
/// Pixels predicted void are kept apart in `unpredicted` and count as false
/// negatives of their ground-truth class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub k: usize,
    pub counts: Vec<u64>,
    pub unpredicted: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> ConfusionMatrix {
        ConfusionMatrix {
            k,
            counts: vec![0; k * k],
            unpredicted: vec![0; k],
        }
    }

    pub fn get(&self, g: usize, p: usize) -> u64 {
        self.counts[g * self.k + p]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.unpredicted.iter().sum::<u64>()
    }

    /// Element-wise sum, the reduction over image pairs.
    pub fn add(&mut self, o: &ConfusionMatrix) {
        assert_eq!(self.k, o.k, "adding confusion matrices of different sizes");
        self.counts.iter_mut().zip(&o.counts).for_each(|(a, b)| *a += b);
        self.unpredicted.iter_mut().zip(&o.unpredicted).for_each(|(a, b)| *a += b);
    }

    pub fn transpose(&self) -> ConfusionMatrix {
        let mut t = ConfusionMatrix::zeros(self.k);
        for g in 0..self.k {
            for p in 0..self.k {
                t.counts[p * self.k + g] = self.get(g, p);
            }
        }
        t.unpredicted = self.unpredicted.clone();
        t
    }
}

pub fn confusion(gt: &LabelMap, pred: &LabelMap, classes: &ClassSet) -> Result<ConfusionMatrix, EvalError> {
    if (gt.width, gt.height) != (pred.width, pred.height) {
        return Err(EvalError::SizeMismatch(gt.width, gt.height, pred.width, pred.height));
    }
    let mut m = ConfusionMatrix::zeros(classes.len());
    let w = gt.width.max(1);
    let unknown = |map, code, i: usize| EvalError::UnknownCode {
        map,
        code,
        x: i as u32 % w,
        y: i as u32 / w,
    };
    for (i, (&g, &p)) in gt.data.iter().zip(&pred.data).enumerate() {
        let pi = match p {
            VOID_CODE => None,
            _ => Some(classes.index_of(p).ok_or_else(|| unknown("prediction", p, i))?),
        };
        if g == VOID_CODE {
            continue;
        }
        let gi = classes.index_of(g).ok_or_else(|| unknown("ground truth", g, i))?;
        match pi {
            Some(pi) => m.counts[gi * m.k + pi] += 1,
            None => m.unpredicted[gi] += 1,
        }
    }
    Ok(m)
}

/// Treatment of classes absent from both maps when averaging.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsentPolicy {
    /// Leave them out of the mean.
    #[default]
    Exclude,
    /// Count them as IoU 0.
    AsZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IoUReport {
    pub classes: Vec<(u8, String)>,
    /// `None` where the class appears in neither map.
    pub per_class: Vec<Option<f64>>,
}

impl IoUReport {
    pub fn from_values(classes: Vec<(u8, String)>, per_class: Vec<Option<f64>>) -> IoUReport {
        assert_eq!(classes.len(), per_class.len());
        IoUReport { classes, per_class }
    }

    pub fn mean(&self, policy: AbsentPolicy) -> f64 {
        let (sum, n) = self.per_class.iter().fold((0.0, 0usize), |(s, n), v| match (v, policy) {
            (Some(v), _) => (s + v, n + 1),
            (None, AbsentPolicy::AsZero) => (s, n + 1),
            (None, AbsentPolicy::Exclude) => (s, n),
        });
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// `code,name,iou` rows; absent classes have an empty value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("code,name,iou\n");
        for ((code, name), v) in self.classes.iter().zip(&self.per_class) {
            match v {
                Some(v) => out.push_str(&format!("{code},{name},{v:.6}\n")),
                None => out.push_str(&format!("{code},{name},\n")),
            }
        }
        out
    }
}

/// Per-class `TP / (TP + FP + FN)`.
pub fn iou(m: &ConfusionMatrix, classes: &ClassSet) -> IoUReport {
    let k = m.k;
    let per_class = (0..k)
        .map(|c| {
            let tp = m.get(c, c);
            let row: u64 = (0..k).map(|p| m.get(c, p)).sum::<u64>() + m.unpredicted[c];
            let col: u64 = (0..k).map(|g| m.get(g, c)).sum();
            let union = row + col - tp;
            (union > 0).then(|| tp as f64 / union as f64)
        })
        .collect();
    IoUReport {
        classes: classes.entries().to_vec(),
        per_class,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(w: u32, h: u32, data: &[u8]) -> LabelMap {
        LabelMap {
            width: w,
            height: h,
            data: data.to_vec(),
        }
    }

    fn two() -> ClassSet {
        ClassSet::new(vec![(0, "a".into()), (1, "b".into())]).unwrap()
    }

    #[test]
    fn hand_counted_example() {
        let m = confusion(&map(4, 1, &[0, 0, 1, 1]), &map(4, 1, &[0, 1, 1, 1]), &two()).unwrap();
        assert_eq!(m.counts, vec![1, 1, 0, 2]);
        let r = iou(&m, &two());
        assert_eq!(r.per_class, vec![Some(0.5), Some(2.0 / 3.0)]);
        assert!((r.mean(AbsentPolicy::Exclude) - 7.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn identical_maps_are_diagonal() {
        let d = [0, 3, 8, 8, 11, 0];
        let cs = ClassSet::standard();
        let m = confusion(&map(3, 2, &d), &map(3, 2, &d), &cs).unwrap();
        for g in 0..16 {
            for p in 0..16 {
                if g != p {
                    assert_eq!(m.get(g, p), 0);
                }
            }
        }
        let r = iou(&m, &cs);
        assert_eq!(r.mean(AbsentPolicy::Exclude), 1.0);
        assert_eq!(r.per_class.iter().flatten().count(), 4);
    }

    #[test]
    fn void_ground_truth_is_ignored() {
        let m = confusion(&map(2, 2, &[255; 4]), &map(2, 2, &[0, 1, 0, 1]), &two()).unwrap();
        assert_eq!(m.total(), 0);
    }

    #[test]
    fn void_prediction_is_a_miss() {
        let m = confusion(&map(2, 1, &[0, 0]), &map(2, 1, &[0, 255]), &two()).unwrap();
        assert_eq!(iou(&m, &two()).per_class[0], Some(0.5));
    }

    #[test]
    fn errors() {
        assert_eq!(
            confusion(&map(2, 1, &[0, 0]), &map(1, 2, &[0, 0]), &two()),
            Err(EvalError::SizeMismatch(2, 1, 1, 2))
        );
        let e = confusion(&map(2, 1, &[0, 7]), &map(2, 1, &[0, 0]), &two()).unwrap_err();
        assert!(e.to_string().contains("code 7"), "{e}");
        assert!(ClassSet::new(vec![(1, "x".into()), (1, "y".into())]).is_err());
    }

    #[test]
    fn palette_files() {
        let rows = serde_json::to_string(&default_palette()).unwrap();
        assert_eq!(ClassSet::from_json(&rows).unwrap(), ClassSet::standard());
        let header = format!("{{\"version\":\"x\",\"palette\":{rows}}}");
        assert_eq!(ClassSet::from_json(&header).unwrap().len(), 16);
    }
}
