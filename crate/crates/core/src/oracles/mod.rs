//! Concrete models with closed-form subderivatives.

mod distance;
mod l1;
mod moreau;
mod relu_net;
mod smooth;
mod zero_norm;

pub use distance::{distance_to_set, DistanceToSet};
pub use l1::{l1_norm, neg_l1_norm, L1Norm, NegL1Norm};
pub use moreau::{
    moreau_envelope, AbsValue, MoreauEnvelope, ProxFriendly, ScalarProx, UserScalar, ZeroNormCost,
};
pub use relu_net::{relu_network_loss, ReluNetworkLoss};
pub use smooth::{half_squared_norm, half_squared_distance, linear, smooth_model, SmoothModel};
pub use zero_norm::{zero_norm_composite, ZeroNormComposite};
