#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sqlev/value.hpp"

struct sqlite3;

namespace sqlev {

struct QueryResult {
    enum class Status { ok, error, timeout };
    Status status = Status::ok;
    std::vector<std::vector<Value>> rows;
    bool truncated = false;      // row_cap reached with more rows pending
    double elapsed_ms = 0.0;
    std::string error_message;
};

// Read-only SQLite connection. The library never opens a database writable;
// fixtures in tests create their own files through the C API directly.
class Database {
public:
    static Database open_read_only(const std::string& path);  // throws DataError
    ~Database();
    Database(Database&&) noexcept;
    Database& operator=(Database&&) noexcept;
    Database(const Database&) = delete;
    Database& operator=(const Database&) = delete;

    // Executes one statement with positional text parameters. Timeouts are
    // enforced through a progress handler; timeout_ms <= 0 disables them.
    // row_cap < 0 keeps every row.
    QueryResult run(const std::string& sql, const std::vector<std::string>& params,
                    int timeout_ms, long long row_cap) const;

    sqlite3* raw() const { return db_; }

private:
    Database() = default;
    sqlite3* db_ = nullptr;
};

}  // namespace sqlev
