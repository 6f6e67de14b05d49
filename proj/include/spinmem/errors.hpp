/*
   Copyright 2026 The spinmem authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace spinmem {

/// Error taxonomy shared by all modules. Validation-class codes map to CLI
/// exit code 1, numerical-class codes to exit code 2.
enum class Errc {
    non_positive_parameter,
    narrowband_violated,
    unknown_convention,
    step_too_large,
    duration_too_short,
    insufficient_data,
    segment_too_long,
    empty_input,
    no_convergence,
    peak_not_found,
    eps_too_close_to_one,
    non_positive_input,
    hash_mismatch,
    bad_config,
    io_error,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::non_positive_parameter: return "NonPositiveParameter";
        case Errc::narrowband_violated:    return "NarrowbandViolated";
        case Errc::unknown_convention:     return "UnknownConvention";
        case Errc::step_too_large:         return "StepTooLarge";
        case Errc::duration_too_short:     return "DurationTooShort";
        case Errc::insufficient_data:      return "InsufficientData";
        case Errc::segment_too_long:       return "SegmentTooLong";
        case Errc::empty_input:            return "EmptyInput";
        case Errc::no_convergence:         return "NoConvergence";
        case Errc::peak_not_found:         return "PeakNotFound";
        case Errc::eps_too_close_to_one:   return "EpsTooCloseToOne";
        case Errc::non_positive_input:     return "NonPositiveInput";
        case Errc::hash_mismatch:          return "HashMismatch";
        case Errc::bad_config:             return "BadConfig";
        case Errc::io_error:               return "IoError";
    }
    return "UnknownError";
}

/// True for errors that indicate bad inputs rather than a numerical failure.
inline bool is_validation_error(Errc c) {
    switch (c) {
        case Errc::no_convergence:
        case Errc::peak_not_found:
        case Errc::insufficient_data:
            return false;
        default:
            return true;
    }
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace spinmem
