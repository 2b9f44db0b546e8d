#pragma once

#include <stdexcept>
#include <string>

namespace zsar {

// Base of every error the library raises. `category()` drives CLI exit codes:
// input/config problems map to 2, numerical failures to 3.
class Error : public std::runtime_error {
public:
    enum class Category { Input, Numerical };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }

private:
    Category category_;
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(Category::Input, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(Category::Input, what) {}
};

class DataValidationError : public Error {
public:
    explicit DataValidationError(const std::string& what) : Error(Category::Input, what) {}
};

class LoadError : public Error {
public:
    LoadError(std::string file, long long offset, const std::string& what)
        : Error(Category::Input, file + " @ " + std::to_string(offset) + ": " + what),
          file_(std::move(file)),
          offset_(offset) {}

    const std::string& file() const noexcept { return file_; }
    long long offset() const noexcept { return offset_; }

private:
    std::string file_;
    long long offset_;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(Category::Numerical, what) {}
};

// The Sylvester operator aX + Xb has a (near) zero eigenvalue.
class SingularPencilError : public NumericalError {
public:
    explicit SingularPencilError(const std::string& what) : NumericalError(what) {}
};

}  // namespace zsar
