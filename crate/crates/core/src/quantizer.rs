//! 1-bit quantization of RF frames and the infinite-resolution passthrough.

use crate::txchain::{RfFrame, RfStage};

/// Entry-wise sign quantization with `sign(0) = +1`. Output entries are
/// exactly +-1 and the frame is tagged post-quantization.
pub fn one_bit(rf: &RfFrame) -> RfFrame {
    rf.map_values(RfStage::PostQuantization, |v| if v >= 0.0 { 1.0 } else { -1.0 })
}

/// Identity; runs the identical downstream chain without quantization.
pub fn passthrough(rf: &RfFrame) -> RfFrame {
    rf.clone()
}
