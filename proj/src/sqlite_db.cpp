#include "sqlev/sqlite_db.hpp"

#include <sqlite3.h>

#include <chrono>

#include "sqlev/errors.hpp"
#include "sqlev/text.hpp"

namespace sqlev {

namespace {

struct Deadline {
    std::chrono::steady_clock::time_point at;
    bool expired = false;
};

int progress_callback(void* ctx) {
    auto* deadline = static_cast<Deadline*>(ctx);
    if (std::chrono::steady_clock::now() >= deadline->at) {
        deadline->expired = true;
        return 1;  // interrupt the statement
    }
    return 0;
}

Value read_column(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_NULL:
            return Value::null();
        case SQLITE_INTEGER:
            return Value::integer(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT:
            return Value::real(sqlite3_column_double(stmt, col));
        case SQLITE_BLOB: {
            int n = sqlite3_column_bytes(stmt, col);
            const void* data = sqlite3_column_blob(stmt, col);
            std::string_view bytes(static_cast<const char*>(data), static_cast<size_t>(n));
            return Value::blob(static_cast<size_t>(n), fnv1a64_hex(bytes));
        }
        case SQLITE_TEXT:
        default: {
            const unsigned char* txt = sqlite3_column_text(stmt, col);
            int n = sqlite3_column_bytes(stmt, col);
            return Value::text(std::string(reinterpret_cast<const char*>(txt),
                                           static_cast<size_t>(n)));
        }
    }
}

}  // namespace

Database Database::open_read_only(const std::string& path) {
    Database db;
    int rc = sqlite3_open_v2(path.c_str(), &db.db_, SQLITE_OPEN_READONLY, nullptr);
    if (rc != SQLITE_OK) {
        std::string msg = db.db_ ? sqlite3_errmsg(db.db_) : "out of memory";
        if (db.db_) sqlite3_close(db.db_);
        db.db_ = nullptr;
        throw DataError("cannot open database " + path + ": " + msg);
    }
    sqlite3_extended_result_codes(db.db_, 1);
    return db;
}

Database::~Database() {
    if (db_) sqlite3_close(db_);
}

Database::Database(Database&& other) noexcept : db_(other.db_) { other.db_ = nullptr; }

Database& Database::operator=(Database&& other) noexcept {
    if (this != &other) {
        if (db_) sqlite3_close(db_);
        db_ = other.db_;
        other.db_ = nullptr;
    }
    return *this;
}

QueryResult Database::run(const std::string& sql, const std::vector<std::string>& params,
                          int timeout_ms, long long row_cap) const {
    QueryResult result;
    auto start = std::chrono::steady_clock::now();

    sqlite3_stmt* stmt = nullptr;
    const char* tail = nullptr;
    int rc = sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, &tail);
    if (rc != SQLITE_OK) {
        result.status = QueryResult::Status::error;
        result.error_message = sqlite3_errmsg(db_);
        return result;
    }
    if (tail && !trim(tail).empty()) {
        sqlite3_finalize(stmt);
        result.status = QueryResult::Status::error;
        result.error_message = "multiple statements are not allowed";
        return result;
    }

    for (size_t i = 0; i < params.size(); ++i) {
        sqlite3_bind_text(stmt, static_cast<int>(i + 1), params[i].data(),
                          static_cast<int>(params[i].size()), SQLITE_TRANSIENT);
    }

    Deadline deadline;
    if (timeout_ms > 0) {
        deadline.at = start + std::chrono::milliseconds(timeout_ms);
        sqlite3_progress_handler(db_, 256, progress_callback, &deadline);
    }

    int ncols = sqlite3_column_count(stmt);
    while (true) {
        rc = sqlite3_step(stmt);
        if (rc == SQLITE_ROW) {
            if (row_cap >= 0 && static_cast<long long>(result.rows.size()) >= row_cap) {
                result.truncated = true;
                break;
            }
            std::vector<Value> row;
            row.reserve(static_cast<size_t>(ncols));
            for (int c = 0; c < ncols; ++c) row.push_back(read_column(stmt, c));
            result.rows.push_back(std::move(row));
        } else if (rc == SQLITE_DONE) {
            break;
        } else {
            if (deadline.expired ||
                (rc & 0xFF) == SQLITE_INTERRUPT) {
                result.status = QueryResult::Status::timeout;
            } else {
                result.status = QueryResult::Status::error;
                result.error_message = sqlite3_errmsg(db_);
            }
            break;
        }
    }

    if (timeout_ms > 0) sqlite3_progress_handler(db_, 0, nullptr, nullptr);
    sqlite3_finalize(stmt);

    auto end = std::chrono::steady_clock::now();
    result.elapsed_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end - start)
            .count();
    if (result.status != QueryResult::Status::ok) {
        result.rows.clear();
        result.truncated = false;
    }
    return result;
}

}  // namespace sqlev
