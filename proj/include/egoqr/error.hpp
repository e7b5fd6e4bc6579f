// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace egoqr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input bytes: PGM headers, format information, segment headers, manifests.
class FormatError : public Error
{
public:
    using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error
{
public:
    using Error::Error;
};

/// Payload does not fit any supported symbol version.
class CapacityError : public Error
{
public:
    using Error::Error;
};

/// A Reed-Solomon block could not be corrected.
class ChecksumError : public Error
{
public:
    using Error::Error;
};

/// Valid QR content we deliberately do not handle (ECI, Kanji, structured append...).
class UnsupportedError : public Error
{
public:
    using Error::Error;
};

/// Degenerate geometry: collinear corners, empty boxes, boxes outside the image.
class GeometryError : public Error
{
public:
    using Error::Error;
};

} // namespace egoqr
