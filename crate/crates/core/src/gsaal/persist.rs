//! JSON model files.
//!
//! Layout: `{format_version, d, n_train, norm_mean, norm_std, masks, generator,
//! detectors}` where `masks` are `"0110"` strings and every network is stored
//! as a list of row-major weight matrices (last row of each is the bias).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Detector, GsaalModel};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{HiddenActivation, Mlp, OutputActivation};
use crate::subspace::SubspaceMask;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    d: usize,
    n_train: usize,
    norm_mean: Vec<f64>,
    norm_std: Vec<f64>,
    masks: Vec<String>,
    generator: NetworkRecord,
    detectors: Vec<NetworkRecord>,
}

#[derive(Serialize, Deserialize)]
struct NetworkRecord {
    input_dim: usize,
    layer_width: usize,
    hidden_activation: String,
    output_activation: String,
    layers: Vec<Vec<Vec<f64>>>,
}

impl From<&Mlp> for NetworkRecord {
    fn from(net: &Mlp) -> Self {
        Self {
            input_dim: net.input_dim(),
            layer_width: net.layer_width(),
            hidden_activation: "relu".into(),
            output_activation: net.output_activation().name().into(),
            layers: net
                .layers()
                .iter()
                .map(|w| w.row_iter().map(<[f64]>::to_vec).collect())
                .collect(),
        }
    }
}

impl NetworkRecord {
    fn into_mlp(self) -> Result<Mlp> {
        if self.hidden_activation != "relu" {
            return Err(Error::Format(format!(
                "unsupported hidden activation {:?}",
                self.hidden_activation
            )));
        }
        let output = OutputActivation::from_name(&self.output_activation).ok_or_else(|| {
            Error::Format(format!(
                "unsupported output activation {:?}",
                self.output_activation
            ))
        })?;
        let layers = self
            .layers
            .iter()
            .map(|rows| Matrix::from_rows(rows))
            .collect::<Result<Vec<_>>>()?;
        let net = Mlp::from_layers(layers, HiddenActivation::Relu, output)?;
        if net.input_dim() != self.input_dim || net.layer_width() != self.layer_width {
            return Err(Error::Format(format!(
                "network header says {}x{} but weights are {}x{}",
                self.input_dim,
                self.layer_width,
                net.input_dim(),
                net.layer_width()
            )));
        }
        Ok(net)
    }
}

impl GsaalModel {
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            d: self.d,
            n_train: self.n_train,
            norm_mean: self.norm_mean.clone(),
            norm_std: self.norm_std.clone(),
            masks: self.detectors.iter().map(|det| det.mask.to_bits()).collect(),
            generator: (&self.generator).into(),
            detectors: self.detectors.iter().map(|det| (&det.net).into()).collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        if file.masks.len() != file.detectors.len() {
            return Err(Error::Format(format!(
                "{} masks but {} detectors",
                file.masks.len(),
                file.detectors.len()
            )));
        }
        if file.norm_mean.len() != file.d {
            return Err(Error::Format(format!(
                "d = {} but norm_mean has {} entries",
                file.d,
                file.norm_mean.len()
            )));
        }
        let generator = file.generator.into_mlp()?;
        let detectors = file
            .masks
            .iter()
            .zip(file.detectors)
            .map(|(bits, rec)| {
                Ok(Detector {
                    mask: SubspaceMask::parse(bits)?,
                    net: rec.into_mlp()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GsaalModel::new(generator, detectors, file.norm_mean, file.norm_std, file.n_train)
    }
}

pub fn save_model(model: &GsaalModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = model.to_json()?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<GsaalModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    GsaalModel::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::draw_masks;

    fn random_model() -> GsaalModel {
        let masks = draw_masks(5, 3, 2).unwrap();
        let detectors = masks
            .masks()
            .iter()
            .enumerate()
            .map(|(i, m)| Detector {
                mask: m.clone(),
                net: Mlp::init_weights(m.popcount(), 6, 1, OutputActivation::Sigmoid, i as u64),
            })
            .collect();
        let mut gen = Mlp::init_weights(5, 5, 5, OutputActivation::Linear, 9);
        // non-trivial bias values exercise the full float range
        gen.layers_mut()[4].set(5, 2, 1.0 / 3.0);
        GsaalModel::new(
            gen,
            detectors,
            vec![0.1, -2.5, 3.0, 1e-3, 7.0],
            vec![1.0, 0.3, 2.0 / 7.0, 5.0, 1e-4],
            123,
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let model = random_model();
        let back = GsaalModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(model, back);
        assert_eq!(model.to_json().unwrap(), back.to_json().unwrap());
    }

    #[test]
    fn rejects_other_versions_and_garbage() {
        let text = random_model()
            .to_json()
            .unwrap()
            .replace("\"format_version\":1", "\"format_version\":2");
        assert!(matches!(GsaalModel::from_json(&text), Err(Error::Format(_))));
        assert!(GsaalModel::from_json("{").is_err());
    }

    #[test]
    fn file_layout_has_documented_fields() {
        let v: serde_json::Value =
            serde_json::from_str(&random_model().to_json().unwrap()).unwrap();
        for key in [
            "format_version",
            "d",
            "n_train",
            "norm_mean",
            "norm_std",
            "masks",
            "generator",
            "detectors",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["masks"].as_array().unwrap().len(), 3);
        assert!(v["masks"][0].as_str().unwrap().chars().all(|c| c == '0' || c == '1'));
    }
}
