#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace korpusmap::cli {

/// Bad flag or config-file value; reported with exit status 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ValueKind { Text, Count, Real, Scheme };

struct OptionSpec {
    std::string_view name;
    ValueKind kind;
    /// Empty means "no value"; commands decide what that implies.
    std::string_view fallback;
    std::string_view help;
};

/// Every option any subcommand understands. Config-file keys use the same
/// names without the leading dashes.
std::span<const OptionSpec> option_specs();
const OptionSpec& option_spec(std::string_view name);

/// Option values resolved as flag > config file > built-in default.
class RunConfig {
public:
    /// Throws UsageError for a malformed value, before any command work.
    static RunConfig resolve(std::span<const std::string_view> keys, const std::map<std::string, std::string>& flags,
                             const std::optional<std::filesystem::path>& config_file);

    bool has(std::string_view key) const;
    const std::string& text(std::string_view key) const;
    std::size_t count(std::string_view key) const;
    double real(std::string_view key) const;
    std::uint64_t seed() const;

    void set(std::string_view key, std::string value);

    /// `key = value` lines in key order, readable again through --config.
    std::string format() const;

private:
    void check(const OptionSpec& spec) const;

    std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace korpusmap::cli
