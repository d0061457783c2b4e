#ifndef NAE_CHECKPOINT_HPP
#define NAE_CHECKPOINT_HPP

#include <string>

#include "nae/mlp.hpp"
#include "nae/model.hpp"

namespace nae {

/// Binary checkpoint container (all integers and doubles little-endian):
///
///   bytes 0..7   magic "NAECKPT1"
///   u32          payload type: 1 = autoencoder, 2 = mlp
///
/// autoencoder payload:
///   u32 enc nonlin, u32 dec nonlin, u32 tied
///   u64 hidden, u64 input
///   f64[hidden*input] W (row-major), f64[hidden] b
///   f64[input*hidden] Wdec (absent when tied), f64[input] d
///
/// mlp payload:
///   u64 n_layers, then per layer:
///   u64 out, u64 in, u32 nonlin, f64[out*in] W, f64[out] b
///
/// save -> load -> save is byte-identical.
void save_checkpoint(const std::string &path, const NaeParams &params);
void save_checkpoint(const std::string &path, const MlpParams &params);

NaeParams load_nae_checkpoint(const std::string &path);
MlpParams load_mlp_checkpoint(const std::string &path);

/// Payload type of an existing checkpoint (1 or 2).
int checkpoint_type(const std::string &path);

}  // namespace nae

#endif
