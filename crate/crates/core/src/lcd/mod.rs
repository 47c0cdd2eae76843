//! Least common denominators and the conditioned inverse Littlewood–Offord checks.

pub mod search;
pub mod verifiers;

pub use search::{compare_modes, dist_to_nonzero_lattice, lcd, lcd_with, LcdCertificate, LcdMode, LcdResult, LcdStatus, DEFAULT_PHI_MAX};
pub use verifiers::{
    lcd_rarity_experiment, rank_event_mc, rarity_alpha_for, verify_cond_walk_lcd, verify_hanson_wright, verify_inverse_lwo,
    verify_projection_decay, verify_rank_h, verify_second_moment, verify_tensorization, AugmentedMatrix, LwoConstants, RankEventReport,
    RankEventSpec,
};
