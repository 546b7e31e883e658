#pragma once

#include <stdexcept>
#include <string>

namespace harnode {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HARNODE_DEFINE_ERROR(Name)          \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    }

HARNODE_DEFINE_ERROR(MalformedPacket);
HARNODE_DEFINE_ERROR(InvalidArgument);
HARNODE_DEFINE_ERROR(InvalidExchange);
HARNODE_DEFINE_ERROR(Unsynchronized);
HARNODE_DEFINE_ERROR(ConfigError);
HARNODE_DEFINE_ERROR(SessionAlreadyActive);
HARNODE_DEFINE_ERROR(NoActiveSession);
HARNODE_DEFINE_ERROR(InsufficientData);
HARNODE_DEFINE_ERROR(SingleClass);
HARNODE_DEFINE_ERROR(InputError);

#undef HARNODE_DEFINE_ERROR

}  // namespace harnode
