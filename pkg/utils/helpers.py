def create_result(success: bool, message: str, data=None, errors=None, exit_code=0):
    result = {
        'success': success,
        'message': message,
        'exit_code': exit_code,
    }
    if data is not None:
        result['data'] = data
    if errors is not None:
        result['errors'] = errors
    return result
