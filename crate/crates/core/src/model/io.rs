//! JSON model container.

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

use super::params::{ModelDims, TaggerParams};
use super::TaggerModel;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const FORMAT_NAME: &str = "headtag-model";

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    dims: ModelDims,
    use_crf: bool,
    domains: Vec<String>,
    vocabulary: Vocabulary,
    params: TaggerParams,
}

pub fn save_model(model: &TaggerModel) -> Result<String> {
    let file = ModelFile {
        format: FORMAT_NAME.to_string(),
        version: MODEL_FORMAT_VERSION,
        dims: model.dims,
        use_crf: model.use_crf,
        domains: model.domains.clone(),
        vocabulary: model.vocab.clone(),
        params: model.params.clone(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn load_model(text: &str) -> Result<TaggerModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.format != FORMAT_NAME {
        return Err(Error::invalid(format!(
            "not a model file (format `{}`)",
            file.format
        )));
    }
    if file.version != MODEL_FORMAT_VERSION {
        return Err(Error::invalid(format!(
            "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
            file.version
        )));
    }
    file.dims.validate()?;
    if file.domains.is_empty() {
        return Err(Error::invalid("model has no domain heads"));
    }
    file.params.check_shapes(
        &file.dims,
        file.vocabulary.word_count(),
        file.vocabulary.char_count(),
        file.domains.len(),
    )?;
    Ok(TaggerModel {
        dims: file.dims,
        vocab: file.vocabulary,
        domains: file.domains,
        params: file.params,
        use_crf: file.use_crf,
    })
}
