#pragma once

#include <stdexcept>
#include <string>

namespace topseg {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- text / segmentation ---
struct EmptyInputError : Error {
    using Error::Error;
};
struct RangeError : Error {
    using Error::Error;
};
struct InvalidSegmentationError : Error {
    using Error::Error;
};

// --- windowing ---
struct SentenceTooLargeError : Error {
    using Error::Error;
};

// --- gateway / providers ---
struct TransportError : Error {
    using Error::Error;
};
struct AuthError : Error {
    using Error::Error;
};
struct TimeoutError : Error {
    using Error::Error;
};
struct MalformedResponseError : Error {
    using Error::Error;
};
struct NoIndicesError : Error {
    using Error::Error;
};
struct NoValidIndexError : Error {
    using Error::Error;
};

// --- segmenter ---
struct PromptTooLargeError : Error {
    using Error::Error;
};

// --- embeddings / baselines ---
struct ProviderError : Error {
    using Error::Error;
};
struct DimensionMismatchError : Error {
    using Error::Error;
};

// --- metrics ---
struct SentenceCountMismatchError : Error {
    using Error::Error;
};

// --- corpus / files ---
struct ParseError : Error {
    using Error::Error;
};
struct SchemaViolationError : Error {
    using Error::Error;
};
struct InsufficientPoolError : Error {
    using Error::Error;
};
struct NoSectionsError : Error {
    using Error::Error;
};

// --- cli / config ---
struct ConfigError : Error {
    using Error::Error;
};
struct IdMismatchError : Error {
    using Error::Error;
};

} // namespace topseg
