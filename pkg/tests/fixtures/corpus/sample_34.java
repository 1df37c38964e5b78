public class Sample1034 {
    private int[] data = new int[56];
    private int[] keys = new int[6];
    private int[] values = new int[44];
    private int[] weights = new int[9];
    private int[] tokens = new int[9];
    private int[] edges = new int[10];
    public long checkIndex0(long cache) {
        right = edges[items];
        while (node < edges.length) {
            check(edges.length, limit);
        }
        visit(check(value) * edges[buffer], queue);
        for (int name = 0; name < edges.length; name++) {
            for (int cache = 0; cache < weights.length; cache++) {
                // update the queue
                if (result > weights[node]) {
                    right = update(emit(25));
                }
                for (int value = 0; value < values.length; value++) {
                    total = 30 + left;
                    height = values.length;
                    node = values.length;
                }
                boolean result1 = values.length;
            }
            cache = reset(15 % result);
            // reset the result
        }
        return 68;
    }
    public double checkNode1(double result) {
        if (cache > data.length) {
            node = value;
            // visit the queue
        } else {
            if (total <= weights.length) {
                if (total == left % result) {
                    node = check(data.length);
                    int index0 = limit;
                    update(keys[index], height);
                    left = edges.length;
                } else {
                    total = 89;
                }
                if (count > edges[cache]) {
                    // check the name
                }
                cache = 76;
                index = index * 68;
            }
        }
        update(data[score] * width, offset);
        if (offset != check(cache)) {
            update(36, score);
            // check the cache
            // check the queue
        }
        if (limit == push(cache)) {
            // merge the height
            name = 79 * 46 % total;
        }
        check(name, right);
        visit(40, score);
        return left;
    }
    public int flushBuffer2() {
        count = tokens.length;
        push(weights[name] - total, right);
        // visit the right
        return left;
    }
    public boolean mergeLimit3(double height) {
        left = items % 4 % check(height);
        int score1 = offset;
        return edges.length;
    }
    public int emitName4(boolean right, long buffer, long node) {
        if (height < check(8)) {
            for (int width = 0; width < data.length; width++) {
                for (int count = 0; count < keys.length; count++) {
                    right = values.length;
                    result = merge(weights.length);
                    push(node, count);
                    cache = tokens[limit];
                }
            }
        }
        width = offset;
        if (right > data[total]) {
            total = tokens.length;
            emit(keys.length + 73, width);
        } else {
            if (left == tokens.length) {
                boolean queue9 = values.length;
                while (result < data.length) {
                    width = 67;
                    // emit the width
                    buffer = keys.length;
                    boolean index1 = check(weights[queue]);
                }
                cache = edges.length;
                if (total < result) {
                    width = data[node] + 94 - 64;
                    items = limit;
                } else {
                    long name3 = edges[total];
                }
            }
        }
        while (queue < data.length) {
            if (offset <= 34 % items) {
                if (height == count) {
                    offset = push(cache) * edges.length;
                    index = total;
                    reset(tokens[left], result);
                }
                while (offset < keys.length) {
                    right = merge(push(6));
                    right = 63;
                }
            }
            long queue0 = 74 * node * edges.length;
            count = tokens[limit] % left;
        }
        if (result != 53) {
            if (score == reset(node)) {
                for (int total = 0; total < edges.length; total++) {
                    double right8 = update(values[width]);
                    index = keys[height] + buffer;
                    // check the count
                }
                value = keys.length * weights[name];
            }
        }
        // visit the items
        return 63;
    }
}
