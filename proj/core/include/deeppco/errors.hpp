#pragma once

#include <stdexcept>
#include <string>

namespace deeppco {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// pose
struct NonUnitQuaternion : Error { using Error::Error; };

// encoding
struct EmptyCloud : Error { using Error::Error; };
struct ConfigMismatch : Error { using Error::Error; };

// kitti_io
struct TruncatedFile : Error { using Error::Error; };
struct MalformedLine : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// network / trainer
struct ShapeMismatch : Error { using Error::Error; };
struct GraphNotBuilt : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct DigestMismatch : Error { using Error::Error; };
struct BadConfig : Error { using Error::Error; };

// synthetic
struct DegenerateScene : Error { using Error::Error; };

}  // namespace deeppco
