//! Template rendering and speech markup.

pub mod bag;
pub mod ssml;
pub mod template;

pub use bag::ShuffleBag;
pub use ssml::{ssml_postprocess, strip_markup, ProsodyConfig, SsmlOutput};
pub use template::{BagSet, Slots, Template, TemplateFile, TemplateSpec, TemplateStore};
