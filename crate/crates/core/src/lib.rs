//! Arabic dialect identification: text preprocessing, TF-IDF and subword
//! embedding features, a linear SVM, evaluation and an experiment harness.

pub mod codec;
pub mod corpus;
pub mod fasttext;
pub mod metrics;
pub mod morph;
pub mod surface;
pub mod svc;
pub mod tfidf;
pub mod vector;
pub mod harness;
