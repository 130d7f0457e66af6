//! Bayesian and frequentist unit-root tests for zero-mean AR(1) series.
//!
//! The central method approximates the Bayes factor of `ρ = 1` against an
//! unrestricted alternative by the BIC difference of the two fitted models.
//! Reference methods sit alongside it: posterior odds with a uniform
//! stationary prior (fixed or data-driven lower bound), flat and Jeffreys
//! posteriors for `ρ`, a Dickey-Fuller test with simulated p-values, and a
//! quadrature oracle for exact marginal likelihoods.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ar1;
pub mod bic;
pub mod data_io;
pub mod df;
pub mod empirical;
pub mod error;
pub mod evidence;
pub mod experiments;
pub mod oracle;
pub mod posterior;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod svd;
pub mod table;

pub use ar1::{fit_ar1, loglik_at, simulate_ar1, Ar1Fit, InitialCondition, TimeSeries};
pub use bic::{bic_from_tstat, bic_of_fit, bic_test, BicResult};
pub use data_io::{fetch_remote, read_csv, CsvSchema, RemoteConfig, SeriesRecord, Transport};
pub use df::{build_null_table, df_pvalue, df_statistic, DfResult, NullTable, NullTableStore};
pub use empirical::{run_empirical, EmpiricalConfig, EmpiricalReport, EmpiricalRow};
pub use error::{Error, Result, Source};
pub use evidence::{posterior_prob, Evidence, JeffreysGrade, Method};
pub use experiments::{render_table, run_grid, Layout, McCell, McGrid, McMethod, MethodSummary};
pub use oracle::{log_bf01_oracle, log_marginal_h0, log_marginal_h1, log_marginal_laplace, LaplaceVariant, PriorSpec};
pub use posterior::{hpd_interval, tail_prob_ge_one, PosteriorCurve, PriorKind, TailProbability};
pub use svd::{svd_data_driven, svd_fixed, SvdResult};
pub use table::{parse_numeric_table, TableFormat};
